#pragma once

// Nicolas, Robin and CLM inequalities evaluated in log space with
// three-valued verdicts, plus range scans and Hardy-Ramanujan candidates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "arithmetic_functions.hpp"
#include "constants.hpp"
#include "err_bound.hpp"
#include "errors.hpp"
#include "prime_engine.hpp"

namespace nrl {

enum class Status { HOLDS, FAILS, INDETERMINATE, UNDEFINED_RHS };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::HOLDS: return "HOLDS";
    case Status::FAILS: return "FAILS";
    case Status::INDETERMINATE: return "INDETERMINATE";
    case Status::UNDEFINED_RHS: return "UNDEFINED_RHS";
  }
  return "?";
}

/// Which side must be larger for the inequality to hold. The margin is always
/// oriented so that a positive margin means HOLDS.
enum class Orientation {
  LHS_GREATER,  // Nicolas: margin = lhs - rhs
  LHS_LESS,     // Robin, CLM: margin = rhs - lhs
};

enum class Precision { FAST64, GUARDED, HIGH };

inline const char* to_string(Precision p) {
  switch (p) {
    case Precision::FAST64: return "fast64";
    case Precision::GUARDED: return "guarded";
    case Precision::HIGH: return "high";
  }
  return "?";
}

struct CheckVerdict {
  std::uint64_t subject = 0;
  ErrBound lhs_log;
  ErrBound rhs_log;
  ErrBound margin;
  Status status = Status::INDETERMINATE;
  Orientation orientation = Orientation::LHS_GREATER;
};

/// Builds a verdict from both sides. An rhs of -infinity encodes a
/// non-positive linear right-hand side.
inline CheckVerdict make_verdict(std::uint64_t subject, const ErrBound& lhs, const ErrBound& rhs,
                                 Orientation orientation, Precision precision = Precision::GUARDED) {
  CheckVerdict v{subject, lhs, rhs, {}, Status::INDETERMINATE, orientation};
  if (std::isinf(rhs.value) && rhs.value < 0) {
    // e^gamma log log x <= 0: "lhs > rhs" is trivially true, "lhs < rhs" is not
    // meaningful.
    v.margin = {std::numeric_limits<double>::infinity(), 0};
    v.status = orientation == Orientation::LHS_GREATER ? Status::HOLDS : Status::UNDEFINED_RHS;
    if (v.status == Status::UNDEFINED_RHS) v.margin = {std::numeric_limits<double>::quiet_NaN(), 0};
    return v;
  }
  v.margin = orientation == Orientation::LHS_GREATER ? lhs - rhs : rhs - lhs;
  if (precision == Precision::FAST64) {
    v.status = v.margin.value > 0 ? Status::HOLDS : v.margin.value < 0 ? Status::FAILS : Status::INDETERMINATE;
    return v;
  }
  switch (v.margin.sign()) {
    case Sign::POSITIVE: v.status = Status::HOLDS; break;
    case Sign::NEGATIVE: v.status = Status::FAILS; break;
    case Sign::UNKNOWN: v.status = Status::INDETERMINATE; break;
  }
  return v;
}

template <typename Real>
BasicErrBound<Real> gamma_as() {
  const auto g = euler_gamma();
  return {static_cast<Real>(g.value), static_cast<Real>(g.radius) + BasicErrBound<Real>::unit_roundoff()};
}

/// gamma + log(log_log_x) when log_log_x > 0, else -infinity.
template <typename Real>
BasicErrBound<Real> gamma_plus_log(const BasicErrBound<Real>& log_log_x) {
  if (!(log_log_x.lower() > 0)) return {-std::numeric_limits<Real>::infinity(), 0};
  return gamma_as<Real>() + log(log_log_x);
}

/// log(e^gamma log log x) from log x; -infinity when log x <= 1.
template <typename Real>
BasicErrBound<Real> rhs_log_from_log(const BasicErrBound<Real>& log_x) {
  if (!(log_x.lower() > 0)) return {-std::numeric_limits<Real>::infinity(), 0};
  return gamma_plus_log(log(log_x));
}

/// Reading of "log log N_k^2" in the CLM inequality.
enum class ClmReading {
  LOGLOG_OF_SQUARE,  // log log (N_k^2) = log(2 theta(p_k))
  SQUARE_OF_LOGLOG,  // (log log N_k)^2 = (log theta(p_k))^2
};

inline const char* to_string(ClmReading r) {
  return r == ClmReading::LOGLOG_OF_SQUARE ? "loglog-of-square" : "square-of-loglog";
}

// ---------------------------------------------------------------------------
// Incremental prime-indexed scanners

/// Running state shared by the Nicolas and CLM scans: the k-th prime, the
/// running LHS log-sum and theta(p_k).
template <typename Real>
struct PrimorialState {
  std::uint64_t k = 0;
  std::uint64_t last_prime = 0;
  CompensatedSum<Real> lhs;
  CompensatedSum<Real> theta;
};

/// Nicolas: prod p/(p-1) > e^gamma log log N_k, in logs:
///   sum log(1 + 1/(p_i - 1)) > gamma + log log theta(p_k).
template <typename Real = double>
class NicolasScanner {
 public:
  using E = BasicErrBound<Real>;
  explicit NicolasScanner(Precision precision = Precision::GUARDED, PrimorialState<Real> s = {})
      : precision_(precision), s_(s) {}

  CheckVerdict add_prime(std::uint64_t p) {
    s_.lhs.add(log1p(E::exact(1) / E::exact(static_cast<Real>(p - 1))));
    s_.theta.add(log_of<Real>(p));
    s_.last_prime = p;
    ++s_.k;
    return verdict();
  }

  CheckVerdict verdict() const {
    const auto lhs = s_.lhs.result();
    const auto rhs = rhs_log_from_log(s_.theta.result());
    return make_verdict(s_.k, convert<double>(lhs), convert<double>(rhs), Orientation::LHS_GREATER, precision_);
  }

  const PrimorialState<Real>& state() const { return s_; }

 private:
  Precision precision_;
  PrimorialState<Real> s_;
};

/// CLM: prod (p+1)/p < e^gamma log log N_k^2, in logs:
///   sum log(1 + 1/p_i) < gamma + log(reading).
template <typename Real = double>
class ClmScanner {
 public:
  using E = BasicErrBound<Real>;
  explicit ClmScanner(ClmReading reading = ClmReading::LOGLOG_OF_SQUARE, Precision precision = Precision::GUARDED,
                      PrimorialState<Real> s = {})
      : reading_(reading), precision_(precision), s_(s) {}

  CheckVerdict add_prime(std::uint64_t p) {
    s_.lhs.add(log1p(E::exact(1) / E::exact(static_cast<Real>(p))));
    s_.theta.add(log_of<Real>(p));
    s_.last_prime = p;
    ++s_.k;
    return verdict();
  }

  CheckVerdict verdict() const {
    const auto lhs = s_.lhs.result();
    const auto theta = s_.theta.result();
    E rhs;
    if (reading_ == ClmReading::LOGLOG_OF_SQUARE) {
      // log N^2 = 2 theta
      rhs = rhs_log_from_log(E::exact(2) * theta);
    } else {
      // log((log theta)^2) = 2 log|log theta|
      const E ll = log(theta);
      const E abs_ll = ll.value < 0 ? -ll : ll;
      rhs = abs_ll.lower() > 0 ? gamma_as<Real>() + E::exact(2) * log(abs_ll)
                               : E{-std::numeric_limits<Real>::infinity(), 0};
    }
    return make_verdict(s_.k, convert<double>(lhs), convert<double>(rhs), Orientation::LHS_LESS, precision_);
  }

  const PrimorialState<Real>& state() const { return s_; }

 private:
  ClmReading reading_;
  Precision precision_;
  PrimorialState<Real> s_;
};

// ---------------------------------------------------------------------------
// Single checks

inline CheckVerdict nicolas_check(std::uint64_t k, Precision precision = Precision::GUARDED, const SieveConfig& cfg = {}) {
  if (k < 1) throw InvalidRange("nicolas_check: k must be >= 1");
  NicolasScanner<double> s(precision);
  for (std::uint64_t p : first_primes(k, cfg)) s.add_prime(p);
  return s.verdict();
}

inline CheckVerdict clm_upper_check(std::uint64_t k, ClmReading reading = ClmReading::LOGLOG_OF_SQUARE,
                                    Precision precision = Precision::GUARDED, const SieveConfig& cfg = {}) {
  if (k < 1) throw InvalidRange("clm_upper_check: k must be >= 1");
  ClmScanner<double> s(reading, precision);
  for (std::uint64_t p : first_primes(k, cfg)) s.add_prime(p);
  return s.verdict();
}

/// Robin: sigma(n)/n < e^gamma log log n.
inline CheckVerdict robin_verdict(const SigmaRatio& r, Precision precision = Precision::GUARDED) {
  if (precision == Precision::HIGH) {
    using E = BasicErrBound<long double>;
    const E ratio = E::exact(static_cast<long double>(r.sigma)) / E::exact(static_cast<long double>(r.n));
    const E lhs = log(ratio);
    const E rhs = rhs_log_from_log(log(E::exact(static_cast<long double>(r.n))));
    return make_verdict(r.n, convert<double>(lhs), convert<double>(rhs), Orientation::LHS_LESS, precision);
  }
  const ErrBound lhs = log(r.ratio);
  const ErrBound rhs = rhs_log_from_log(log_of(r.n));
  return make_verdict(r.n, lhs, rhs, Orientation::LHS_LESS, precision);
}

inline CheckVerdict robin_check(std::uint64_t n, Precision precision = Precision::GUARDED, const ArithmeticConfig& cfg = {}) {
  if (n < 1) throw InvalidRange("robin_check: n must be >= 1");
  return robin_verdict(sigma_ratio(n, cfg), precision);
}

/// Log-space Robin check for factorizations of any size; `subject` labels the row.
inline CheckVerdict robin_check(const Factorization& f, std::uint64_t subject, Precision precision = Precision::GUARDED) {
  const ErrBound lhs = log_sigma_ratio(f);
  const ErrBound rhs = f.factors.empty() ? ErrBound{-std::numeric_limits<double>::infinity(), 0} : rhs_log_from_log(f.log_value());
  return make_verdict(subject, lhs, rhs, Orientation::LHS_LESS, precision);
}

// ---------------------------------------------------------------------------
// Scans

struct StridePolicy {
  enum class Kind { ALL, GEOMETRIC } kind = Kind::ALL;
  double ratio = 1.0;

  static StridePolicy all() { return {}; }
  static StridePolicy geometric(double r) {
    if (!(r > 1.0)) throw InvalidRange("geometric stride ratio must be > 1");
    return {Kind::GEOMETRIC, r};
  }

  /// Next emitted subject after `k`.
  std::uint64_t next_after(std::uint64_t k) const {
    if (kind == Kind::ALL) return k + 1;
    const auto g = static_cast<std::uint64_t>(std::ceil(static_cast<double>(k) * ratio));
    return std::max(k + 1, g);
  }
};

struct ScanSummary {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t total = 0;
  std::uint64_t holds = 0;
  std::uint64_t fails = 0;
  std::uint64_t indeterminate = 0;
  std::uint64_t undefined = 0;
  std::vector<CheckVerdict> failures;
  double wall_time = 0;

  void record(const CheckVerdict& v) {
    ++total;
    switch (v.status) {
      case Status::HOLDS: ++holds; break;
      case Status::FAILS:
        ++fails;
        failures.push_back(v);
        break;
      case Status::INDETERMINATE: ++indeterminate; break;
      case Status::UNDEFINED_RHS: ++undefined; break;
    }
  }
};

using VerdictSink = std::function<void(const CheckVerdict&)>;

struct ScanOptions {
  Precision precision = Precision::GUARDED;
  StridePolicy stride;
  SieveConfig sieve;
  ArithmeticConfig arith;
};

namespace detail {

template <typename Scanner>
ScanSummary primorial_scan(Scanner scanner, std::uint64_t k_lo, std::uint64_t k_hi, const ScanOptions& opt,
                           const VerdictSink& sink) {
  if (k_lo < 1 || k_lo > k_hi) throw InvalidRange("scan: need 1 <= k_lo <= k_hi");
  const std::uint64_t bound = nth_prime_upper_bound(k_hi);
  if (bound > opt.sieve.ceiling) throw RangeError("scan: k_hi=" + std::to_string(k_hi) + " exceeds prime ceiling");
  const auto t0 = std::chrono::steady_clock::now();
  ScanSummary sum;
  sum.lo = k_lo;
  sum.hi = k_hi;
  std::uint64_t next_emit = k_lo;
  std::uint64_t k = 0;
  for_each_prime(0, bound, opt.sieve, [&](std::uint64_t p) {
    ++k;
    if (k < k_lo) {
      scanner.add_prime(p);
      return true;
    }
    const CheckVerdict v = scanner.add_prime(p);
    if (k == next_emit || k == k_hi) {
      sum.record(v);
      if (sink) sink(v);
      next_emit = opt.stride.next_after(k);
    }
    return k < k_hi;
  });
  sum.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sum;
}

}  // namespace detail

/// Nicolas verdicts for k in [k_lo, k_hi]; LHS and theta accumulate across k.
inline ScanSummary nicolas_scan(std::uint64_t k_lo, std::uint64_t k_hi, const ScanOptions& opt = {},
                                const VerdictSink& sink = {}) {
  if (opt.precision == Precision::HIGH)
    return detail::primorial_scan(NicolasScanner<long double>(opt.precision), k_lo, k_hi, opt, sink);
  return detail::primorial_scan(NicolasScanner<double>(opt.precision), k_lo, k_hi, opt, sink);
}

inline ScanSummary clm_scan(std::uint64_t k_lo, std::uint64_t k_hi, ClmReading reading, const ScanOptions& opt = {},
                            const VerdictSink& sink = {}) {
  if (opt.precision == Precision::HIGH)
    return detail::primorial_scan(ClmScanner<long double>(reading, opt.precision), k_lo, k_hi, opt, sink);
  return detail::primorial_scan(ClmScanner<double>(reading, opt.precision), k_lo, k_hi, opt, sink);
}

/// Robin failures cross-tabulated by omega(n) and Hardy-Ramanujan shape.
struct RobinCrossTab {
  std::map<std::size_t, std::uint64_t> fails_by_omega;
  std::uint64_t fails_strict_hr = 0;
  std::uint64_t fails_weak_hr = 0;
  std::uint64_t fails_not_weak_hr = 0;

  void record_failure(std::uint64_t n, const ArithmeticConfig& cfg = {}) {
    const auto f = factorize(n, cfg);
    ++fails_by_omega[omega(f)];
    if (is_hardy_ramanujan(f)) ++fails_strict_hr;
    if (is_weak_hardy_ramanujan(f))
      ++fails_weak_hr;
    else
      ++fails_not_weak_hr;
  }
};

struct RobinScanSummary {
  ScanSummary scan;
  RobinCrossTab crosstab;
};

/// Robin verdicts for every n in [lo, hi), from the block sigma sieve.
inline RobinScanSummary robin_scan(std::uint64_t lo, std::uint64_t hi, const ScanOptions& opt = {},
                                   const VerdictSink& sink = {}) {
  if (lo < 2 || lo >= hi) throw InvalidRange("robin_scan: need 2 <= lo < hi");
  const auto t0 = std::chrono::steady_clock::now();
  RobinScanSummary out;
  out.scan.lo = lo;
  out.scan.hi = hi;
  sigma_ratio_range(lo, hi, opt.arith, [&](const SigmaRatio& r) {
    const CheckVerdict v = robin_verdict(r, opt.precision);
    out.scan.record(v);
    if (v.status == Status::FAILS) out.crosstab.record_failure(v.subject, opt.arith);
    if (sink) sink(v);
  });
  out.scan.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Hardy-Ramanujan candidates

/// Strict Hardy-Ramanujan factorizations (first m primes, non-increasing
/// exponents, m <= max_m) with log n <= max_log_n, in lexicographic order of
/// the exponent list. `fn` returns false to stop.
template <typename Fn>
void for_each_hr_candidate(std::size_t max_m, double max_log_n, Fn&& fn) {
  if (max_m < 1) throw InvalidRange("hr_candidates: max_m must be >= 1");
  const auto primes = first_primes(max_m);
  std::vector<double> logp;
  for (auto p : primes) logp.push_back(std::log(static_cast<double>(p)));
  // Admit boundary values such as log 8 computed as 3 log 2.
  const double limit = max_log_n + 1e-9 * std::max(1.0, std::fabs(max_log_n));

  Factorization cur;
  bool stop = false;
  std::function<void(std::size_t, std::uint32_t, double)> rec = [&](std::size_t i, std::uint32_t max_e, double logn) {
    if (stop || i >= primes.size()) return;
    for (std::uint32_t e = 1; e <= max_e && !stop; ++e) {
      const double l = logn + e * logp[i];
      if (l > limit) break;
      cur.factors.push_back({primes[i], e});
      if (!fn(static_cast<const Factorization&>(cur))) stop = true;
      rec(i + 1, e, l);
      cur.factors.pop_back();
    }
  };
  rec(0, std::numeric_limits<std::uint32_t>::max(), 0.0);
}

inline std::vector<Factorization> hr_candidates(std::size_t max_m, double max_log_n) {
  std::vector<Factorization> out;
  for_each_hr_candidate(max_m, max_log_n, [&](const Factorization& f) {
    out.push_back(f);
    return true;
  });
  return out;
}

struct HrScanSummary {
  ScanSummary scan;
  /// Exponent lists of failing candidates, aligned with scan.failures.
  std::vector<std::vector<std::uint32_t>> failing_exponents;
};

/// Log-space Robin check over strict Hardy-Ramanujan candidates. Subjects are
/// candidate ordinals (the integers themselves may not fit 64 bits). Candidates
/// with log n <= log 5040 are the classical exception range and are included.
inline HrScanSummary hr_scan(std::size_t max_m, double max_log_n, Precision precision = Precision::GUARDED,
                             const VerdictSink& sink = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  HrScanSummary out;
  std::uint64_t ordinal = 0;
  for_each_hr_candidate(max_m, max_log_n, [&](const Factorization& f) {
    const CheckVerdict v = robin_check(f, ++ordinal, precision);
    out.scan.record(v);
    if (v.status == Status::FAILS) out.failing_exponents.push_back(f.exponents());
    if (sink) sink(v);
    return true;
  });
  out.scan.lo = 1;
  out.scan.hi = ordinal;
  out.scan.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace nrl
