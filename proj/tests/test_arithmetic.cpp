#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include <nrl/arithmetic_functions.hpp>

using nrl::Factorization;
using nrl::PrimePower;

namespace {

Factorization trial_factor(std::uint64_t n) {
  Factorization f;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    std::uint32_t e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) f.factors.push_back({p, e});
  }
  if (n > 1) f.factors.push_back({n, 1});
  return f;
}

std::uint64_t divisor_sum(std::uint64_t n) {
  std::uint64_t s = 0;
  for (std::uint64_t d = 1; d * d <= n; ++d)
    if (n % d == 0) s += d + (d * d == n ? 0 : n / d);
  return s;
}

// sigma(n) for all n < limit by adding each d to its multiples.
std::vector<std::uint64_t> sigma_table(std::uint64_t limit) {
  std::vector<std::uint64_t> s(limit, 0);
  for (std::uint64_t d = 1; d < limit; ++d)
    for (std::uint64_t m = d; m < limit; m += d) s[m] += d;
  return s;
}

}  // namespace

TEST(Factorize, Examples) {
  EXPECT_TRUE(nrl::factorize(1).factors.empty());
  EXPECT_EQ(nrl::factorize(5040).factors, (std::vector<PrimePower>{{2, 4}, {3, 2}, {5, 1}, {7, 1}}));
  EXPECT_EQ(nrl::factorize(5040).value(), 5040u);
  const std::uint64_t m61 = (std::uint64_t{1} << 61) - 1;
  EXPECT_EQ(nrl::factorize(m61).factors, (std::vector<PrimePower>{{m61, 1}}));
  EXPECT_TRUE(nrl::is_prime_u64(m61));
  EXPECT_THROW(nrl::factorize(0), nrl::InvalidRange);
  nrl::ArithmeticConfig small;
  small.factor_ceiling = 100;
  EXPECT_THROW(nrl::factorize(101, small), nrl::RangeError);
}

TEST(Factorize, MatchesTrialDivisionExhaustively) {
  for (std::uint64_t n = 1; n <= 100'000; ++n) ASSERT_EQ(nrl::factorize(n), trial_factor(n)) << n;
}

TEST(Factorize, RandomLargeValuesRebuildExactly) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const std::uint64_t n = (rng() >> 1) | 1;
    const auto f = nrl::factorize(n);
    boost::multiprecision::cpp_int prod = 1;
    std::uint64_t prev = 0;
    for (const auto& pp : f.factors) {
      ASSERT_GT(pp.prime, prev);
      ASSERT_TRUE(nrl::is_prime_u64(pp.prime));
      ASSERT_GE(pp.exponent, 1u);
      prev = pp.prime;
      for (std::uint32_t e = 0; e < pp.exponent; ++e) prod *= pp.prime;
    }
    ASSERT_EQ(prod, boost::multiprecision::cpp_int(n));
  }
}

TEST(Factorize, SemiprimesOfTwoLargePrimes) {
  // Primes above the 2^20 trial bound, so the rho path is exercised.
  const std::uint64_t ps[] = {1'000'003, 2'147'483'647, 4'294'967'291, 998'244'353};
  for (std::uint64_t a : ps)
    for (std::uint64_t b : ps) {
      if (a > b || static_cast<unsigned __int128>(a) * b >> 63) continue;
      const auto f = nrl::factorize(a * b);
      if (a == b)
        EXPECT_EQ(f.factors, (std::vector<PrimePower>{{a, 2}}));
      else
        EXPECT_EQ(f.factors, (std::vector<PrimePower>{{a, 1}, {b, 1}}));
    }
}

TEST(Factorize, Deterministic) {
  const std::uint64_t n = 4'294'967'291ull * 998'244'353ull;
  EXPECT_EQ(nrl::factorize(n), nrl::factorize(n));
}

TEST(PrimalityTest, AgreesWithTrialDivision) {
  for (std::uint64_t n = 2; n < 50'000; ++n) {
    const auto f = trial_factor(n);
    ASSERT_EQ(nrl::is_prime_u64(n), f.factors.size() == 1 && f.factors[0].exponent == 1) << n;
  }
  EXPECT_FALSE(nrl::is_prime_u64(0));
  EXPECT_FALSE(nrl::is_prime_u64(1));
  EXPECT_FALSE(nrl::is_prime_u64(3215031751ull));  // strong pseudoprime to 2,3,5,7
}

TEST(Sigma, Examples) {
  const auto one = nrl::sigma_ratio(1);
  EXPECT_EQ(one.sigma, 1u);
  EXPECT_TRUE(one.ratio.contains(1.0));
  const auto six = nrl::sigma_ratio(6);
  EXPECT_EQ(six.sigma, 12u);
  EXPECT_TRUE(six.ratio.contains(2.0));
  const auto twelve = nrl::sigma_ratio(12);
  EXPECT_EQ(twelve.sigma, 28u);
  EXPECT_LE(std::fabs(twelve.ratio.value - 7.0 / 3), twelve.ratio.radius + 1e-16);
}

TEST(Sigma, OverflowIsExplicit) {
  // sigma(2^63) = 2^64 - 1 is the largest representable; one more factor overflows.
  EXPECT_EQ(nrl::sigma(Factorization{{{2, 63}}}), ~std::uint64_t{0});
  Factorization f{{{2, 63}, {3, 1}}};
  EXPECT_THROW(nrl::sigma(f), nrl::OverflowError);
  EXPECT_NO_THROW(nrl::log_sigma_ratio(f));
}

TEST(Sigma, MatchesDivisorEnumerationUpTo1e5) {
  const auto table = sigma_table(100'001);
  for (std::uint64_t n = 1; n <= 100'000; ++n) {
    const auto f = nrl::factorize(n);
    ASSERT_EQ(nrl::sigma(f), table[n]) << n;
    if (n % 97 == 0) ASSERT_EQ(table[n], divisor_sum(n));
    // sigma(n)/n as a product over prime powers, checked exactly: sigma(n) * prod p^e = n * prod (1 + p + ... + p^e).
    boost::multiprecision::cpp_rational prod = 1;
    for (const auto& pp : f.factors) {
      boost::multiprecision::cpp_rational s = 0, t = 1;
      for (std::uint32_t e = 0; e <= pp.exponent; ++e, t /= pp.prime) s += t;
      prod *= s;
    }
    ASSERT_EQ(prod, boost::multiprecision::cpp_rational(table[n], n)) << n;
  }
}

TEST(Sigma, LogRatioEnclosesExactRatio) {
  for (std::uint64_t n : {2ull, 12ull, 5040ull, 720720ull, 963761198400ull}) {
    const auto f = nrl::factorize(n);
    const auto lr = nrl::log_sigma_ratio(f);
    const long double exact = std::log(static_cast<long double>(nrl::sigma(f)) / static_cast<long double>(n));
    EXPECT_LE(std::fabs(static_cast<long double>(lr.value) - exact), lr.radius + 1e-18L) << n;
  }
}

TEST(Sigma, RangeMatchesPointwise) {
  const auto r = nrl::sigma_ratio_range(1, 4);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].sigma, 3u);
  EXPECT_EQ(r[2].sigma, 4u);
  EXPECT_EQ(nrl::sigma_ratio_range(6, 7)[0].sigma, 12u);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t lo = 1 + rng() % 50'000'000;
    const std::uint64_t hi = lo + 1 + rng() % 5000;
    nrl::ArithmeticConfig cfg;
    cfg.block_size = 64 + rng() % 2000;
    const auto block = nrl::sigma_ratio_range(lo, hi, cfg);
    ASSERT_EQ(block.size(), hi - lo);
    for (std::size_t j = 0; j < block.size(); ++j) {
      const auto one = nrl::sigma_ratio(lo + j);
      ASSERT_EQ(block[j].n, one.n);
      ASSERT_EQ(block[j].sigma, one.sigma);
      ASSERT_EQ(block[j].ratio.value, one.ratio.value);
    }
  }
  EXPECT_THROW(nrl::sigma_ratio_range(0, 5), nrl::InvalidRange);
  EXPECT_THROW(nrl::sigma_ratio_range(5, 5), nrl::InvalidRange);
}

TEST(Sigma, RangeWithWorkersMatchesSerial) {
  nrl::ArithmeticConfig one, many;
  one.block_size = many.block_size = 4096;
  many.workers = 3;
  const auto a = nrl::sigma_ratio_range(1, 60'000, one);
  const auto b = nrl::sigma_ratio_range(1, 60'000, many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].sigma, b[i].sigma);
}

TEST(Phi, Examples) {
  EXPECT_EQ(nrl::euler_phi(nrl::factorize(1)), 1u);
  EXPECT_EQ(nrl::euler_phi(nrl::factorize(210)), 48u);
  EXPECT_EQ(nrl::euler_phi(nrl::factorize(1024)), 512u);
}

TEST(Phi, MatchesCoprimeCount) {
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    std::uint64_t c = 0;
    for (std::uint64_t a = 1; a <= n; ++a) c += std::gcd(a, n) == 1;
    ASSERT_EQ(nrl::euler_phi(nrl::factorize(n)), c) << n;
  }
}

TEST(Multiplicative, RandomCoprimePairs) {
  std::mt19937_64 rng(31337);
  int tested = 0;
  while (tested < 2000) {
    const std::uint64_t a = 1 + rng() % 1000, b = 1 + rng() % 1000;
    if (std::gcd(a, b) != 1) continue;
    ++tested;
    const auto fa = nrl::factorize(a), fb = nrl::factorize(b), fab = nrl::factorize(a * b);
    ASSERT_EQ(nrl::sigma(fab), nrl::sigma(fa) * nrl::sigma(fb));
    ASSERT_EQ(nrl::euler_phi(fab), nrl::euler_phi(fa) * nrl::euler_phi(fb));
  }
}

TEST(Multiplicative, PhiTimesSigmaBelowSquare) {
  const auto table = sigma_table(100'001);
  for (std::uint64_t n = 2; n <= 100'000; ++n) {
    const auto phi = nrl::euler_phi(nrl::factorize(n));
    ASSERT_LT(static_cast<unsigned __int128>(phi) * table[n], static_cast<unsigned __int128>(n) * n) << n;
  }
}

TEST(Omega, Examples) {
  EXPECT_EQ(nrl::omega(nrl::factorize(1)), 0u);
  EXPECT_EQ(nrl::omega(nrl::factorize(30)), 3u);
  EXPECT_EQ(nrl::omega(nrl::factorize(5040)), 4u);
}

TEST(Divisors, MatchEnumeration) {
  for (std::uint64_t n = 1; n <= 3000; ++n) {
    std::vector<std::uint64_t> d;
    for (std::uint64_t k = 1; k <= n; ++k)
      if (n % k == 0) d.push_back(k);
    ASSERT_EQ(nrl::divisors(nrl::factorize(n)), d);
  }
}

TEST(HardyRamanujan, Examples) {
  EXPECT_TRUE(nrl::is_hardy_ramanujan(nrl::factorize(5040)));
  EXPECT_FALSE(nrl::is_hardy_ramanujan(nrl::factorize(18)));
  EXPECT_FALSE(nrl::is_weak_hardy_ramanujan(nrl::factorize(18)));
  EXPECT_FALSE(nrl::is_hardy_ramanujan(nrl::factorize(81)));
  EXPECT_TRUE(nrl::is_weak_hardy_ramanujan(nrl::factorize(81)));
  EXPECT_TRUE(nrl::is_hardy_ramanujan(nrl::factorize(1)));
}

TEST(HardyRamanujan, MatchesBruteForceDefinition) {
  const std::uint64_t first[] = {2, 3, 5, 7, 11, 13, 17, 19};
  for (std::uint64_t n = 1; n <= 20'000; ++n) {
    const auto f = trial_factor(n);
    bool weak = true, strict = true;
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
      if (i > 0 && f.factors[i].exponent > f.factors[i - 1].exponent) weak = false;
      if (f.factors[i].prime != first[i]) strict = false;
    }
    ASSERT_EQ(nrl::is_weak_hardy_ramanujan(nrl::factorize(n)), weak) << n;
    ASSERT_EQ(nrl::is_hardy_ramanujan(nrl::factorize(n)), weak && strict) << n;
  }
}
