#pragma once

// Small dense least-squares fits and sample grids shared by the Mertens
// estimator and the C/D audit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace nrl {

struct LinearFit {
  std::vector<double> coeffs;
  /// Standard errors from the residual variance; zero for exact fits.
  std::vector<double> std_errors;
  double residual_norm = 0;
};

/// Least squares of y against the columns `basis(x)` for each sample x.
inline LinearFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys,
                               const std::function<std::vector<double>(double)>& basis) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  if (n == 0) throw InsufficientSamples("least_squares: no samples");
  const auto k = static_cast<Eigen::Index>(basis(xs.front()).size());
  if (n < k) throw InsufficientSamples("least_squares: fewer samples than basis functions");
  Eigen::MatrixXd a(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = basis(xs[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = row[static_cast<std::size_t>(j)];
    y(i) = ys[static_cast<std::size_t>(i)];
  }
  const auto qr = a.colPivHouseholderQr();
  const Eigen::VectorXd c = qr.solve(y);
  const Eigen::VectorXd r = y - a * c;

  LinearFit fit;
  fit.coeffs.assign(c.data(), c.data() + k);
  fit.residual_norm = r.norm();
  fit.std_errors.assign(static_cast<std::size_t>(k), 0.0);
  if (n > k) {
    const double var = r.squaredNorm() / static_cast<double>(n - k);
    const Eigen::MatrixXd cov = (a.transpose() * a).inverse() * var;
    for (Eigen::Index j = 0; j < k; ++j) fit.std_errors[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, cov(j, j)));
  }
  return fit;
}

/// Roughly `points` integers spaced geometrically over [lo, hi], strictly
/// increasing, always containing lo and hi.
inline std::vector<std::uint64_t> geometric_grid(std::uint64_t lo, std::uint64_t hi, std::size_t points) {
  if (lo < 1 || lo > hi) throw InvalidRange("geometric_grid: need 1 <= lo <= hi");
  std::vector<std::uint64_t> g{lo};
  if (points >= 2 && hi > lo) {
    const double ratio = std::pow(static_cast<double>(hi) / static_cast<double>(lo), 1.0 / static_cast<double>(points - 1));
    for (std::size_t i = 1; i + 1 < points; ++i) {
      const auto v = static_cast<std::uint64_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, static_cast<double>(i))));
      if (v > g.back() && v < hi) g.push_back(v);
    }
  }
  if (hi > g.back()) g.push_back(hi);
  return g;
}

/// Evenly spaced integers over [lo, hi] (inclusive), strictly increasing.
inline std::vector<std::uint64_t> linear_grid(std::uint64_t lo, std::uint64_t hi, std::size_t points) {
  if (lo > hi) throw InvalidRange("linear_grid: need lo <= hi");
  std::vector<std::uint64_t> g{lo};
  if (points >= 2) {
    for (std::size_t i = 1; i + 1 < points; ++i) {
      const auto v = lo + (hi - lo) * i / (points - 1);
      if (v > g.back() && v < hi) g.push_back(v);
    }
  }
  if (hi > g.back()) g.push_back(hi);
  return g;
}

/// Geometric grid with a fixed number of points per decade anchored at powers
/// of ten, so grids to different maxima are nested.
inline std::vector<std::uint64_t> decade_grid(std::uint64_t lo, std::uint64_t hi, unsigned per_decade) {
  if (lo < 1 || lo > hi || per_decade == 0) throw InvalidRange("decade_grid: need 1 <= lo <= hi, per_decade >= 1");
  std::vector<std::uint64_t> g;
  for (unsigned i = 0;; ++i) {
    const double v = std::pow(10.0, static_cast<double>(i) / per_decade);
    const auto m = static_cast<std::uint64_t>(std::llround(v));
    if (m > hi) break;
    if (m >= lo && (g.empty() || m > g.back())) g.push_back(m);
  }
  if (g.empty() || g.back() != hi) {
    if (!g.empty() && g.back() > hi) g.pop_back();
    g.push_back(hi);
  }
  return g;
}

}  // namespace nrl
