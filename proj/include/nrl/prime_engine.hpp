#pragma once

// Segmented sieve of Eratosthenes and prime-indexed sums (theta, log-primorials).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "err_bound.hpp"
#include "errors.hpp"

namespace nrl {

struct SieveConfig {
  std::uint64_t ceiling = std::uint64_t{1} << 40;
  /// Numbers covered by one segment (odd-only bitset holds half as many bits).
  std::uint64_t segment_size = std::uint64_t{1} << 20;
  unsigned workers = 1;
};

struct PrimeTable {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::vector<std::uint64_t> primes;
  /// pi(lo - 1).
  std::uint64_t count_before_lo = 0;

  std::uint64_t count_through_hi() const { return count_before_lo + primes.size(); }
};

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Primes below `limit` by a plain sieve; used for base primes and oracles.
inline std::vector<std::uint32_t> simple_sieve(std::uint32_t limit) {
  std::vector<std::uint32_t> out;
  if (limit <= 2) return out;
  std::vector<bool> composite(limit, false);
  for (std::uint32_t i = 2; i < limit; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = std::uint64_t{i} * i; j < limit; j += i) composite[j] = true;
  }
  return out;
}

namespace detail {

inline void check_range(std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg) {
  if (lo >= hi) throw InvalidRange("sieve: empty range [" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
  if (hi > cfg.ceiling)
    throw RangeError("sieve: hi=" + std::to_string(hi) + " exceeds ceiling " + std::to_string(cfg.ceiling));
}

/// Sieves one segment [lo, hi) with an odd-only bitset. `base` must hold every
/// prime up to isqrt(hi - 1).
inline std::vector<std::uint64_t> sieve_one_segment(std::uint64_t lo, std::uint64_t hi,
                                                    const std::vector<std::uint32_t>& base) {
  std::vector<std::uint64_t> out;
  if (lo < 3 && hi > 2) out.push_back(2);
  std::uint64_t first = std::max<std::uint64_t>(lo, 3);
  if (first % 2 == 0) ++first;
  if (first >= hi) return out;
  const std::uint64_t count = (hi - first + 1) / 2;  // odd numbers in [first, hi)
  std::vector<std::uint64_t> bits((count + 63) / 64, ~std::uint64_t{0});
  if (count % 64) bits.back() = (std::uint64_t{1} << (count % 64)) - 1;

  for (std::uint32_t p32 : base) {
    const std::uint64_t p = p32;
    if (p == 2) continue;
    if (p * p >= hi) break;
    std::uint64_t start = std::max(p * p, (first + p - 1) / p * p);
    if (start % 2 == 0) start += p;
    for (std::uint64_t j = start; j < hi; j += 2 * p) {
      const std::uint64_t idx = (j - first) / 2;
      bits[idx / 64] &= ~(std::uint64_t{1} << (idx % 64));
    }
  }
  for (std::size_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    while (word) {
      const int b = std::countr_zero(word);
      out.push_back(first + 2 * (w * 64 + static_cast<std::uint64_t>(b)));
      word &= word - 1;
    }
  }
  return out;
}

inline std::vector<std::uint32_t> base_primes_for(std::uint64_t hi) {
  return simple_sieve(static_cast<std::uint32_t>(isqrt(hi) + 2));
}

}  // namespace detail

/// Visits every prime in [lo, hi) in increasing order. Segments may be sieved
/// concurrently (cfg.workers) but `fn` is always called in ascending order.
/// `fn` may return false to stop early.
template <typename Fn>
void for_each_prime(std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg, Fn&& fn) {
  detail::check_range(lo, hi, cfg);
  const auto base = detail::base_primes_for(hi);
  const std::uint64_t seg = std::max<std::uint64_t>(cfg.segment_size, 128);
  const unsigned workers = std::max(1u, cfg.workers);

  std::uint64_t next = lo;
  while (next < hi) {
    std::vector<std::future<std::vector<std::uint64_t>>> batch;
    for (unsigned w = 0; w < workers && next < hi; ++w) {
      const std::uint64_t a = next;
      const std::uint64_t b = std::min(hi, a + seg);
      next = b;
      if (workers == 1) {
        std::promise<std::vector<std::uint64_t>> ready;
        ready.set_value(detail::sieve_one_segment(a, b, base));
        batch.push_back(ready.get_future());
      } else {
        batch.push_back(std::async(std::launch::async, [a, b, &base] { return detail::sieve_one_segment(a, b, base); }));
      }
    }
    for (auto& f : batch) {
      for (std::uint64_t p : f.get()) {
        if constexpr (std::is_same_v<std::invoke_result_t<Fn, std::uint64_t>, bool>) {
          if (!fn(p)) return;
        } else {
          fn(p);
        }
      }
    }
  }
}

/// Counts primes in [lo, hi).
inline std::uint64_t count_primes(std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg = {}) {
  if (lo >= hi) return 0;
  std::uint64_t n = 0;
  for_each_prime(lo, hi, cfg, [&](std::uint64_t) { ++n; });
  return n;
}

/// Exactly the primes in [lo, hi). When `count_before_lo` is not supplied it is
/// recomputed by counting from 0, which costs O(lo).
inline PrimeTable sieve_segment(std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg = {},
                                std::optional<std::uint64_t> count_before_lo = std::nullopt) {
  detail::check_range(lo, hi, cfg);
  PrimeTable t;
  t.lo = lo;
  t.hi = hi;
  t.count_before_lo = count_before_lo ? *count_before_lo : count_primes(0, lo, cfg);
  for_each_prime(lo, hi, cfg, [&](std::uint64_t p) { t.primes.push_back(p); });
  return t;
}

/// Upper bound for the n-th prime (Rosser: p_n < n (log n + log log n) for n >= 6).
inline std::uint64_t nth_prime_upper_bound(std::uint64_t n) {
  if (n < 6) return 14;
  const double ln = std::log(static_cast<double>(n));
  return static_cast<std::uint64_t>(static_cast<double>(n) * (ln + std::log(ln))) + 3;
}

inline std::uint64_t nth_prime(std::uint64_t n, const SieveConfig& cfg = {}) {
  if (n < 1) throw InvalidRange("nth_prime: index must be >= 1");
  const std::uint64_t bound = nth_prime_upper_bound(n);
  if (bound > cfg.ceiling)
    throw RangeError("nth_prime(" + std::to_string(n) + ") may exceed ceiling " + std::to_string(cfg.ceiling));
  std::uint64_t seen = 0, found = 0;
  for_each_prime(0, bound, cfg, [&](std::uint64_t p) {
    if (++seen == n) {
      found = p;
      return false;
    }
    return true;
  });
  return found;
}

/// First `k` primes.
inline std::vector<std::uint64_t> first_primes(std::uint64_t k, const SieveConfig& cfg = {}) {
  std::vector<std::uint64_t> out;
  if (k == 0) return out;
  out.reserve(k);
  const std::uint64_t bound = nth_prime_upper_bound(k);
  if (bound > cfg.ceiling) throw RangeError("first_primes: bound exceeds ceiling");
  for_each_prime(0, bound, cfg, [&](std::uint64_t p) {
    out.push_back(p);
    return out.size() < k;
  });
  return out;
}

/// log n as an ErrBound.
template <typename Real = double>
BasicErrBound<Real> log_of(std::uint64_t n) {
  const auto x = n < (std::uint64_t{1} << 53) ? BasicErrBound<Real>::exact(static_cast<Real>(n))
                                              : BasicErrBound<Real>::rounded(static_cast<Real>(n));
  return log(x);
}

/// Streaming Chebyshev theta: sum of log p over added primes.
template <typename Real = double>
class BasicThetaAccumulator {
 public:
  void add_prime(std::uint64_t p) {
    sum_.add(log_of<Real>(p));
    x_ = p;
  }

  /// Evaluation point: the largest prime added (theta is constant up to the next prime).
  std::uint64_t x() const { return x_; }
  std::uint64_t terms() const { return sum_.terms(); }
  BasicErrBound<Real> theta() const { return sum_.result(); }

  /// Folds in the accumulator of a later, disjoint block of primes. Blocks
  /// must be merged in ascending order for bitwise-reproducible results.
  void merge(const BasicThetaAccumulator& later) {
    sum_.merge(later.sum_);
    x_ = std::max(x_, later.x_);
  }

  typename CompensatedSum<Real>::State state() const { return sum_.state(); }
  static BasicThetaAccumulator from_state(std::uint64_t x, const typename CompensatedSum<Real>::State& s) {
    BasicThetaAccumulator a;
    a.x_ = x;
    a.sum_ = CompensatedSum<Real>::from_state(s);
    return a;
  }

 private:
  std::uint64_t x_ = 0;
  CompensatedSum<Real> sum_;
};

using ThetaAccumulator = BasicThetaAccumulator<double>;

/// theta(x) = sum_{p <= x} log p.
inline ThetaAccumulator theta_accumulate(std::uint64_t x, const SieveConfig& cfg = {}) {
  if (x < 2) throw InvalidRange("theta: x must be >= 2");
  ThetaAccumulator acc;
  for_each_prime(0, x + 1, cfg, [&](std::uint64_t p) { acc.add_prime(p); });
  return acc;
}

inline ErrBound theta(std::uint64_t x, const SieveConfig& cfg = {}) { return theta_accumulate(x, cfg).theta(); }

struct LogPrimorial {
  std::uint64_t k = 0;
  /// The k-th prime, i.e. the theta evaluation point.
  std::uint64_t p_k = 0;
  ErrBound log_value;
};

/// log of the product of the first k primes, equal to theta(p_k).
inline LogPrimorial log_primorial(std::uint64_t k, const SieveConfig& cfg = {}) {
  if (k < 1) throw InvalidRange("log_primorial: k must be >= 1");
  const std::uint64_t bound = nth_prime_upper_bound(k);
  if (bound > cfg.ceiling) throw RangeError("log_primorial: k too large for ceiling");
  ThetaAccumulator acc;
  for_each_prime(0, bound, cfg, [&](std::uint64_t p) {
    acc.add_prime(p);
    return acc.terms() < k;
  });
  return {k, acc.x(), acc.theta()};
}

/// Exact primorial, kept as an oracle for small k.
inline boost::multiprecision::cpp_int exact_primorial(std::uint64_t k) {
  boost::multiprecision::cpp_int prod = 1;
  for (std::uint64_t p : first_primes(k)) prod *= p;
  return prod;
}

}  // namespace nrl
