#pragma once

// Pinned high-precision constants (Euler gamma, exp(gamma), Meissel-Mertens M)
// and an empirical estimator of M from prime reciprocal sums.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "err_bound.hpp"
#include "errors.hpp"
#include "fitting.hpp"
#include "prime_engine.hpp"

namespace nrl {

using HighPrecision = boost::multiprecision::cpp_dec_float_50;

enum class ConstantSource { LITERATURE_PINNED, COMPUTED };

inline std::string_view to_string(ConstantSource s) {
  return s == ConstantSource::LITERATURE_PINNED ? "literature-pinned" : "computed";
}

struct NamedConstant {
  std::string name;
  HighPrecision value;
  HighPrecision radius;
  ConstantSource source = ConstantSource::LITERATURE_PINNED;

  /// The constant rounded to double, with the rounding folded into the radius.
  ErrBound bound() const {
    const double v = value.convert_to<double>();
    const HighPrecision err = boost::multiprecision::abs(HighPrecision(v) - value) + radius;
    return {v, ErrBound::up(err.convert_to<double>())};
  }

  /// Decimal digits of the pinned value.
  std::string digits(int n = 45) const { return value.str(n, std::ios_base::fixed); }
};

namespace detail {

inline const char* const kGammaDigits = "0.57721566490153286060651209008240243104215933593992359880577";
inline const char* const kMertensDigits = "0.26149721284764278375542683860869585905156664826120";

}  // namespace detail

inline NamedConstant get_constant(std::string_view name) {
  // 50 pinned digits; the cpp_dec_float_50 representation adds no error.
  const HighPrecision pinned_radius("1e-48");
  if (name == "gamma") return {"gamma", HighPrecision(detail::kGammaDigits), pinned_radius, ConstantSource::LITERATURE_PINNED};
  if (name == "mertens") return {"mertens", HighPrecision(detail::kMertensDigits), pinned_radius, ConstantSource::LITERATURE_PINNED};
  if (name == "exp_gamma") {
    const HighPrecision g(detail::kGammaDigits);
    const HighPrecision v = boost::multiprecision::exp(g);
    // |exp(g + r) - exp(g)| <= exp(g) (e^r - 1) ~ v r; plus the exp evaluation itself.
    const HighPrecision r = v * pinned_radius * 2 + HighPrecision("1e-45");
    return {"exp_gamma", v, r, ConstantSource::COMPUTED};
  }
  throw UnknownConstant("unknown constant '" + std::string(name) + "' (expected gamma, exp_gamma or mertens)");
}

inline const ErrBound& euler_gamma() {
  static const ErrBound g = get_constant("gamma").bound();
  return g;
}

inline const ErrBound& mertens_constant() {
  static const ErrBound m = get_constant("mertens").bound();
  return m;
}

/// sum_{i<=m} 1/p_i and log log p_m at one grid point.
struct ReciprocalSample {
  std::uint64_t m = 0;
  std::uint64_t p_m = 0;
  BasicErrBound<long double> reciprocal_sum;
  BasicErrBound<long double> loglog_p;

  long double log_p() const { return std::log(static_cast<long double>(p_m)); }
};

/// Streams the first max(grid) primes once and records sums at each grid index.
inline std::vector<ReciprocalSample> sample_reciprocal_sums(const std::vector<std::uint64_t>& grid,
                                                            const SieveConfig& cfg = {}) {
  std::vector<ReciprocalSample> out;
  if (grid.empty()) return out;
  if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < 1)
    throw InvalidRange("sample_reciprocal_sums: grid must be ascending with m >= 1");
  using E = BasicErrBound<long double>;
  const std::uint64_t m_max = grid.back();
  const std::uint64_t bound = nth_prime_upper_bound(m_max);
  if (bound > cfg.ceiling) throw RangeError("sample_reciprocal_sums: grid exceeds prime ceiling");
  CompensatedSum<long double> sum;
  std::size_t gi = 0;
  std::uint64_t m = 0;
  for_each_prime(0, bound, cfg, [&](std::uint64_t p) {
    ++m;
    sum.add(E::exact(1) / E::exact(static_cast<long double>(p)));
    while (gi < grid.size() && grid[gi] == m) {
      const E logp = log(E::exact(static_cast<long double>(p)));
      ReciprocalSample s{m, p, sum.result(), E{}};
      // log log 2 is negative but real; only log p must be positive.
      s.loglog_p = log(logp);
      out.push_back(s);
      ++gi;
    }
    return m < m_max;
  });
  return out;
}

struct MertensFitOptions {
  /// Add a 1/log^2 p_m basis column.
  bool curvature = false;
  std::size_t grid_points = 40;
  /// Smallest m on the grid; 0 picks max(10, m_max / 100). Starting low biases
  /// the intercept because the O(1/log^2) tail is still large there.
  std::uint64_t grid_start = 0;
};

/// Fits a + b/log p (+ c/log^2 p) to samples (log p_m, sum 1/p - log log p_m)
/// and returns `a` with its standard error as radius.
inline ErrBound fit_mertens_samples(const std::vector<double>& log_p, const std::vector<double>& values,
                                    bool curvature = false) {
  if (values.size() < 4 || log_p.size() != values.size())
    throw InsufficientSamples("estimate_mertens: need at least 4 samples, got " + std::to_string(values.size()));
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    return ErrBound::exact(values.front());
  const auto fit = least_squares(log_p, values, [curvature](double l) {
    return curvature ? std::vector<double>{1.0, 1.0 / l, 1.0 / (l * l)} : std::vector<double>{1.0, 1.0 / l};
  });
  return {fit.coeffs[0], fit.std_errors[0]};
}

inline ErrBound estimate_mertens(std::uint64_t m_max, const MertensFitOptions& opt = {}, const SieveConfig& cfg = {}) {
  if (m_max < 10) throw InsufficientSamples("estimate_mertens: m_max must be >= 10");
  const std::uint64_t start = opt.grid_start ? opt.grid_start : std::max<std::uint64_t>(10, m_max / 100);
  const auto grid = geometric_grid(std::min(start, m_max), m_max, opt.grid_points);
  if (grid.size() < 4) throw InsufficientSamples("estimate_mertens: grid has fewer than 4 points");
  std::vector<double> xs, ys;
  for (const auto& s : sample_reciprocal_sums(grid, cfg)) {
    xs.push_back(static_cast<double>(s.log_p()));
    ys.push_back(static_cast<double>(s.reciprocal_sum.value - s.loglog_p.value));
  }
  return fit_mertens_samples(xs, ys, opt.curvature);
}

}  // namespace nrl
