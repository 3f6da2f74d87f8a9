#pragma once

// Floating-point values carrying a rigorous absolute-error radius.
//
// Every arithmetic step adds its own rounding error to the radius and rounds
// the radius upward, so the true value always lies in
// [value - radius, value + radius]. Comparisons are three-valued.

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace nrl {

enum class Sign { POSITIVE, NEGATIVE, UNKNOWN };

template <typename Real>
struct BasicErrBound {
  using real_type = Real;

  Real value{0};
  Real radius{0};

  static constexpr Real unit_roundoff() { return std::numeric_limits<Real>::epsilon() / 2; }

  /// Exact value (radius 0). Integers below 2^53 convert exactly.
  static BasicErrBound exact(Real v) { return {v, Real(0)}; }

  /// Value produced by a single correctly rounded operation or conversion.
  static BasicErrBound rounded(Real v) { return {v, up(unit_roundoff() * std::fabs(v))}; }

  Real lower() const { return value - radius; }
  Real upper() const { return value + radius; }

  bool contains(Real x) const { return std::fabs(x - value) <= radius; }

  Sign sign() const {
    if (value - radius > 0) return Sign::POSITIVE;
    if (value + radius < 0) return Sign::NEGATIVE;
    return Sign::UNKNOWN;
  }

  /// Rounds a non-negative radius up by one ulp so later sums stay conservative.
  static Real up(Real r) { return std::nextafter(r, std::numeric_limits<Real>::infinity()); }

  friend BasicErrBound operator+(const BasicErrBound& a, const BasicErrBound& b) {
    const Real v = a.value + b.value;
    return {v, up(a.radius + b.radius + unit_roundoff() * std::fabs(v))};
  }
  friend BasicErrBound operator-(const BasicErrBound& a, const BasicErrBound& b) {
    const Real v = a.value - b.value;
    return {v, up(a.radius + b.radius + unit_roundoff() * std::fabs(v))};
  }
  friend BasicErrBound operator-(const BasicErrBound& a) { return {-a.value, a.radius}; }
  friend BasicErrBound operator*(const BasicErrBound& a, const BasicErrBound& b) {
    const Real v = a.value * b.value;
    const Real r = std::fabs(a.value) * b.radius + std::fabs(b.value) * a.radius + a.radius * b.radius;
    return {v, up(r + unit_roundoff() * std::fabs(v))};
  }
  friend BasicErrBound operator/(const BasicErrBound& a, const BasicErrBound& b) {
    const Real den_lo = std::fabs(b.value) - b.radius;
    if (!(den_lo > 0)) throw std::domain_error("ErrBound division: denominator interval contains 0");
    const Real v = a.value / b.value;
    // |a/b - a'/b'| <= (|a| rb / |b| + ra) / (|b| - rb)
    const Real r = (a.radius + std::fabs(v) * b.radius) / den_lo;
    return {v, up(r + unit_roundoff() * std::fabs(v))};
  }
  BasicErrBound& operator+=(const BasicErrBound& o) { return *this = *this + o; }
  BasicErrBound& operator-=(const BasicErrBound& o) { return *this = *this - o; }
};

namespace detail {

// libm log/log1p/exp are accurate to within one ulp; two ulps are charged.
template <typename Real>
Real libm_error(Real result) {
  return 4 * BasicErrBound<Real>::unit_roundoff() * std::fabs(result) + std::numeric_limits<Real>::denorm_min();
}

}  // namespace detail

/// Natural log. Requires the whole interval to be positive.
template <typename Real>
BasicErrBound<Real> log(const BasicErrBound<Real>& x) {
  const Real lo = x.value - x.radius;
  if (!(lo > 0)) throw std::domain_error("ErrBound log: argument interval not positive");
  const Real v = std::log(x.value);
  return {v, BasicErrBound<Real>::up(x.radius / lo + detail::libm_error(v))};
}

/// log(1 + x). Requires 1 + x > 0 over the whole interval.
template <typename Real>
BasicErrBound<Real> log1p(const BasicErrBound<Real>& x) {
  const Real lo = 1 + x.value - x.radius;
  if (!(lo > 0)) throw std::domain_error("ErrBound log1p: argument interval not above -1");
  const Real v = std::log1p(x.value);
  return {v, BasicErrBound<Real>::up(x.radius / lo + detail::libm_error(v))};
}

template <typename Real>
BasicErrBound<Real> exp(const BasicErrBound<Real>& x) {
  const Real v = std::exp(x.value);
  // exp(v + r) - exp(v) <= exp(v) * expm1(r)
  const Real r = v * std::expm1(x.radius) * (1 + 4 * BasicErrBound<Real>::unit_roundoff());
  return {v, BasicErrBound<Real>::up(r + detail::libm_error(v))};
}

template <typename To, typename From>
BasicErrBound<To> convert(const BasicErrBound<From>& x) {
  auto out = BasicErrBound<To>::rounded(static_cast<To>(x.value));
  out.radius = BasicErrBound<To>::up(out.radius + static_cast<To>(x.radius));
  return out;
}

template <typename Real>
std::ostream& operator<<(std::ostream& os, const BasicErrBound<Real>& x) {
  return os << x.value << " +/- " << x.radius;
}

using ErrBound = BasicErrBound<double>;

/// Compensated (Kahan) running sum of ErrBound terms.
///
/// The radius is n * u * sum|x_i| plus the sum of the term radii. It does not
/// depend on the compensation, so the bound is valid for any summation order.
template <typename Real>
class CompensatedSum {
 public:
  void add(const BasicErrBound<Real>& term) {
    const Real y = term.value - comp_;
    const Real t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
    abs_sum_ += std::fabs(term.value);
    term_radius_ += term.radius;
    ++terms_;
  }

  BasicErrBound<Real> result() const {
    const Real u = BasicErrBound<Real>::unit_roundoff();
    const Real n = static_cast<Real>(terms_ + 1);
    const Real r = term_radius_ * (1 + n * u) + n * u * abs_sum_;
    return {sum_, BasicErrBound<Real>::up(r)};
  }

  std::uint64_t terms() const { return terms_; }

  /// Folds in a sum over a disjoint later block.
  void merge(const CompensatedSum& o) {
    const Real y = (o.sum_ - o.comp_) - comp_;
    const Real t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
    abs_sum_ += std::fabs(o.abs_sum_);
    term_radius_ += o.term_radius_;
    terms_ += o.terms_ + 1;
  }

  // Raw state, exposed for checkpointing.
  struct State {
    Real sum{0}, comp{0}, abs_sum{0}, term_radius{0};
    std::uint64_t terms{0};
  };
  State state() const { return {sum_, comp_, abs_sum_, term_radius_, terms_}; }
  static CompensatedSum from_state(const State& s) {
    CompensatedSum c;
    c.sum_ = s.sum;
    c.comp_ = s.comp;
    c.abs_sum_ = s.abs_sum;
    c.term_radius_ = s.term_radius;
    c.terms_ = s.terms;
    return c;
  }

 private:
  Real sum_{0};
  Real comp_{0};
  Real abs_sum_{0};
  Real term_radius_{0};
  std::uint64_t terms_{0};
};

}  // namespace nrl
