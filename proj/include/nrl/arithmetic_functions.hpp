#pragma once

// Exact multiplicative functions over 64-bit integers: factorization, sigma,
// phi, omega, divisors and the Hardy-Ramanujan shape predicates.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "err_bound.hpp"
#include "errors.hpp"
#include "prime_engine.hpp"

namespace nrl {

struct PrimePower {
  std::uint64_t prime = 0;
  std::uint32_t exponent = 0;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// n = prod p_i^e_i with p_1 < p_2 < ...; empty for n = 1.
///
/// Candidates produced by hr_candidates can be far beyond 64 bits, so the
/// integer value is derived on demand rather than stored.
struct Factorization {
  std::vector<PrimePower> factors;

  friend bool operator==(const Factorization&, const Factorization&) = default;

  /// The integer itself, or nullopt when it does not fit 64 bits.
  std::optional<std::uint64_t> value() const {
    std::uint64_t n = 1;
    for (const auto& f : factors)
      for (std::uint32_t i = 0; i < f.exponent; ++i)
        if (__builtin_mul_overflow(n, f.prime, &n)) return std::nullopt;
    return n;
  }

  ErrBound log_value() const {
    CompensatedSum<double> s;
    for (const auto& f : factors) s.add(log_of(f.prime) * ErrBound::exact(f.exponent));
    return s.result();
  }

  std::vector<std::uint32_t> exponents() const {
    std::vector<std::uint32_t> e;
    for (const auto& f : factors) e.push_back(f.exponent);
    return e;
  }
};

struct ArithmeticConfig {
  std::uint64_t factor_ceiling = std::uint64_t{1} << 63;
  std::uint64_t range_ceiling = 1'000'000'000;
  std::uint64_t block_size = std::uint64_t{1} << 20;
  unsigned workers = 1;
};

namespace detail {

using u128 = unsigned __int128;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

/// Trial-division primes below 2^20, built once.
inline const std::vector<std::uint32_t>& trial_primes() {
  static const std::vector<std::uint32_t> primes = simple_sieve(1u << 20);
  return primes;
}

// Pollard-Brent rho with the deterministic increment sequence c = 1, 2, ...
inline std::uint64_t rho_factor(std::uint64_t n) {
  if (n % 2 == 0) return 2;
  for (std::uint64_t c = 1;; ++c) {
    auto f = [&](std::uint64_t x) { return (mulmod(x, x, n) + c) % n; };
    std::uint64_t y = 2, x = 2, g = 1, q = 1, ys = 2;
    const std::uint64_t m = 128;
    std::uint64_t r = 1;
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = f(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        for (std::uint64_t i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

}  // namespace detail

/// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = detail::powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

namespace detail {

inline void split_large(std::uint64_t n, std::vector<std::uint64_t>& out) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out.push_back(n);
    return;
  }
  const std::uint64_t d = rho_factor(n);
  split_large(d, out);
  split_large(n / d, out);
}

}  // namespace detail

inline Factorization factorize(std::uint64_t n, const ArithmeticConfig& cfg = {}) {
  if (n < 1) throw InvalidRange("factorize: n must be >= 1");
  if (n > cfg.factor_ceiling) throw RangeError("factorize: n=" + std::to_string(n) + " exceeds ceiling");
  Factorization f;
  for (std::uint32_t p : detail::trial_primes()) {
    if (std::uint64_t{p} * p > n) break;
    if (n % p) continue;
    std::uint32_t e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.factors.push_back({p, e});
  }
  if (n > 1) {
    std::vector<std::uint64_t> rest;
    detail::split_large(n, rest);
    std::sort(rest.begin(), rest.end());
    for (std::uint64_t p : rest) {
      if (!f.factors.empty() && f.factors.back().prime == p)
        ++f.factors.back().exponent;
      else
        f.factors.push_back({p, 1});
    }
  }
  return f;
}

struct SigmaRatio {
  std::uint64_t n = 1;
  std::uint64_t sigma = 1;
  /// sigma / n
  ErrBound ratio;
};

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError(std::string(what) + ": exceeds 64 bits");
  return r;
}

/// 1 + p + ... + p^e, overflow-checked.
inline std::uint64_t prime_power_sigma(std::uint64_t p, std::uint32_t e) {
  std::uint64_t term = 1, sum = 1;
  for (std::uint32_t i = 0; i < e; ++i) {
    term = checked_mul(term, p, "sigma");
    if (__builtin_add_overflow(sum, term, &sum)) throw OverflowError("sigma: exceeds 64 bits");
  }
  return sum;
}

inline ErrBound to_err(std::uint64_t v) {
  return v < (std::uint64_t{1} << 53) ? ErrBound::exact(static_cast<double>(v))
                                      : ErrBound::rounded(static_cast<double>(v));
}

}  // namespace detail

/// Exact sigma(n) = sum of divisors. Throws OverflowError past 64 bits.
inline std::uint64_t sigma(const Factorization& f) {
  std::uint64_t s = 1;
  for (const auto& pp : f.factors) s = detail::checked_mul(s, detail::prime_power_sigma(pp.prime, pp.exponent), "sigma");
  return s;
}

inline SigmaRatio make_sigma_ratio(std::uint64_t n, std::uint64_t sig) {
  return {n, sig, detail::to_err(sig) / detail::to_err(n)};
}

inline SigmaRatio sigma_ratio(std::uint64_t n, const ArithmeticConfig& cfg = {}) {
  return make_sigma_ratio(n, sigma(factorize(n, cfg)));
}

/// log(sigma(n)/n) without forming sigma(n); valid for any size of n.
inline ErrBound log_sigma_ratio(const Factorization& f) {
  CompensatedSum<double> acc;
  for (const auto& pp : f.factors) {
    // sigma(p^e)/p^e = 1 + (1 - p^-e) / (p - 1)
    const ErrBound p = detail::to_err(pp.prime);
    const ErrBound tail = exp(-(log(p) * ErrBound::exact(pp.exponent)));
    const ErrBound s = (ErrBound::exact(1) - tail) / (p - ErrBound::exact(1));
    acc.add(log1p(s));
  }
  return acc.result();
}

inline std::uint64_t euler_phi(const Factorization& f) {
  std::uint64_t phi = 1;
  for (const auto& pp : f.factors) {
    phi = detail::checked_mul(phi, pp.prime - 1, "phi");
    for (std::uint32_t i = 1; i < pp.exponent; ++i) phi = detail::checked_mul(phi, pp.prime, "phi");
  }
  return phi;
}

inline std::size_t omega(const Factorization& f) { return f.factors.size(); }

/// Sorted list of all divisors.
inline std::vector<std::uint64_t> divisors(const Factorization& f) {
  std::vector<std::uint64_t> d{1};
  for (const auto& pp : f.factors) {
    const std::size_t base = d.size();
    std::uint64_t pk = 1;
    for (std::uint32_t i = 0; i < pp.exponent; ++i) {
      pk = detail::checked_mul(pk, pp.prime, "divisors");
      for (std::size_t j = 0; j < base; ++j) d.push_back(detail::checked_mul(d[j], pk, "divisors"));
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

/// Exponents non-increasing over the (increasing) primes present.
inline bool is_weak_hardy_ramanujan(const Factorization& f) {
  for (std::size_t i = 1; i < f.factors.size(); ++i)
    if (f.factors[i].exponent > f.factors[i - 1].exponent) return false;
  return true;
}

/// Primes are exactly the first omega(n) primes and exponents non-increasing.
inline bool is_hardy_ramanujan(const Factorization& f) {
  if (!is_weak_hardy_ramanujan(f)) return false;
  const auto& primes = detail::trial_primes();
  for (std::size_t i = 0; i < f.factors.size(); ++i) {
    const std::uint64_t expected = i < primes.size() ? primes[i] : nth_prime(i + 1);
    if (f.factors[i].prime != expected) return false;
  }
  return true;
}

/// sigma(n)/n for every n in [lo, hi), ascending, computed per block by
/// sieving out prime powers. `fn` receives each SigmaRatio in order.
template <typename Fn>
void sigma_ratio_range(std::uint64_t lo, std::uint64_t hi, const ArithmeticConfig& cfg, Fn&& fn) {
  if (lo < 1 || lo >= hi) throw InvalidRange("sigma_ratio_range: need 1 <= lo < hi");
  if (hi > cfg.range_ceiling + 1) throw RangeError("sigma_ratio_range: hi exceeds range ceiling");
  const auto base = simple_sieve(static_cast<std::uint32_t>(isqrt(hi - 1) + 1));
  const std::uint64_t block = std::max<std::uint64_t>(cfg.block_size, 64);

  auto run_block = [&base](std::uint64_t a, std::uint64_t b) {
    const std::size_t len = b - a;
    std::vector<std::uint64_t> rem(len), sig(len, 1);
    std::iota(rem.begin(), rem.end(), a);
    for (std::uint32_t p32 : base) {
      const std::uint64_t p = p32;
      if (p * p >= b) break;
      for (std::uint64_t m = (a + p - 1) / p * p; m < b; m += p) {
        const std::size_t i = m - a;
        std::uint64_t pe_sum = 1, pe = 1;
        while (rem[i] % p == 0) {
          rem[i] /= p;
          pe *= p;
          pe_sum += pe;
        }
        sig[i] = detail::checked_mul(sig[i], pe_sum, "sigma");
      }
    }
    std::vector<SigmaRatio> out(len);
    for (std::size_t i = 0; i < len; ++i) {
      std::uint64_t s = sig[i];
      if (rem[i] > 1) s = detail::checked_mul(s, rem[i] + 1, "sigma");
      out[i] = make_sigma_ratio(a + i, s);
    }
    return out;
  };

  const unsigned workers = std::max(1u, cfg.workers);
  std::uint64_t next = lo;
  while (next < hi) {
    std::vector<std::future<std::vector<SigmaRatio>>> batch;
    for (unsigned w = 0; w < workers && next < hi; ++w) {
      const std::uint64_t a = next, b = std::min(hi, next + block);
      next = b;
      batch.push_back(std::async(workers == 1 ? std::launch::deferred : std::launch::async,
                                 [&run_block, a, b] { return run_block(a, b); }));
    }
    for (auto& f : batch)
      for (const auto& r : f.get()) {
        if constexpr (std::is_same_v<std::invoke_result_t<Fn, const SigmaRatio&>, bool>) {
          if (!fn(r)) return;
        } else {
          fn(r);
        }
      }
  }
}

inline std::vector<SigmaRatio> sigma_ratio_range(std::uint64_t lo, std::uint64_t hi, const ArithmeticConfig& cfg = {}) {
  std::vector<SigmaRatio> out;
  out.reserve(hi > lo ? hi - lo : 0);
  sigma_ratio_range(lo, hi, cfg, [&](const SigmaRatio& r) { out.push_back(r); });
  return out;
}

}  // namespace nrl
