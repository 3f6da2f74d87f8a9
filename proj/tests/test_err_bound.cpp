#include <gtest/gtest.h>

#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <nrl/err_bound.hpp>

using nrl::ErrBound;
using Hp = boost::multiprecision::cpp_dec_float_50;

namespace {

// True value of an ErrBound built from an exact double, as a 50-digit number.
Hp hp(double x) { return Hp(x); }

bool encloses(const ErrBound& b, const Hp& truth) {
  return boost::multiprecision::abs(Hp(b.value) - truth) <= Hp(b.radius);
}

}  // namespace

TEST(ErrBound, ExactAndRounded) {
  const auto e = ErrBound::exact(3.0);
  EXPECT_EQ(e.radius, 0.0);
  EXPECT_TRUE(e.contains(3.0));
  const auto r = ErrBound::rounded(0.1);
  EXPECT_GT(r.radius, 0.0);
  EXPECT_TRUE(encloses(r, Hp("0.1")));
}

TEST(ErrBound, SignIsThreeValued) {
  EXPECT_EQ((ErrBound{1.0, 0.5}).sign(), nrl::Sign::POSITIVE);
  EXPECT_EQ((ErrBound{-1.0, 0.5}).sign(), nrl::Sign::NEGATIVE);
  EXPECT_EQ((ErrBound{0.1, 0.5}).sign(), nrl::Sign::UNKNOWN);
  EXPECT_EQ((ErrBound{0.0, 0.0}).sign(), nrl::Sign::UNKNOWN);
}

TEST(ErrBound, DivisionByIntervalContainingZeroThrows) {
  EXPECT_THROW(ErrBound::exact(1) / (ErrBound{0.0, 1e-3}), std::domain_error);
  EXPECT_THROW(nrl::log(ErrBound{0.5, 1.0}), std::domain_error);
  EXPECT_THROW(nrl::log1p(ErrBound{-1.0, 0.0}), std::domain_error);
}

// Random exact operands; every result must enclose the 50-digit value.
TEST(ErrBound, OperationsEncloseHighPrecisionResult) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> mag(-30, 30);
  std::uniform_real_distribution<double> unit(0.5, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = unit(rng) * std::exp2(std::floor(mag(rng)));
    const double b = (rng() & 1 ? 1 : -1) * unit(rng) * std::exp2(std::floor(mag(rng)));
    const auto A = ErrBound::exact(a), B = ErrBound::exact(b);
    ASSERT_TRUE(encloses(A + B, hp(a) + hp(b)));
    ASSERT_TRUE(encloses(A - B, hp(a) - hp(b)));
    ASSERT_TRUE(encloses(A * B, hp(a) * hp(b)));
    ASSERT_TRUE(encloses(A / B, hp(a) / hp(b)));
    ASSERT_TRUE(encloses(nrl::log(A), boost::multiprecision::log(hp(a))));
    const double small = std::ldexp(unit(rng), -static_cast<int>(rng() % 40));
    ASSERT_TRUE(encloses(nrl::log1p(ErrBound::exact(small)), boost::multiprecision::log(1 + hp(small))));
    const double x = std::uniform_real_distribution<double>(-20, 20)(rng);
    ASSERT_TRUE(encloses(nrl::exp(ErrBound::exact(x)), boost::multiprecision::exp(hp(x))));
  }
}

// Inputs that already carry a radius: the output must enclose f near both ends of the input interval.
// (2.0 + 1e-6 itself can round to just outside the interval.)
TEST(ErrBound, PropagatesInputRadius) {
  const ErrBound x{2.0, 1e-6};
  for (double v : {2.0 - 0.999e-6, 2.0 + 0.999e-6}) {
    EXPECT_TRUE(encloses(nrl::log(x), boost::multiprecision::log(hp(v))));
    EXPECT_TRUE(encloses(nrl::exp(x), boost::multiprecision::exp(hp(v))));
    EXPECT_TRUE(encloses(x * x, hp(v) * hp(v)));
    EXPECT_TRUE(encloses(ErrBound::exact(1) / x, 1 / hp(v)));
  }
}

TEST(ErrBound, ConvertWidensRadius) {
  const nrl::BasicErrBound<long double> x{1.0L / 3, 1e-19L};
  const auto d = nrl::convert<double>(x);
  EXPECT_TRUE(encloses(d, Hp(1) / 3));
  EXPECT_GE(d.radius, 1e-19);
}

TEST(CompensatedSum, EnclosesHarmonicSum) {
  nrl::CompensatedSum<double> s;
  Hp truth = 0;
  for (int i = 1; i <= 100000; ++i) {
    const auto t = ErrBound::exact(1.0) / ErrBound::exact(i);
    s.add(t);
    truth += Hp(1) / i;
  }
  EXPECT_EQ(s.terms(), 100000u);
  EXPECT_TRUE(encloses(s.result(), truth));
  EXPECT_LT(s.result().radius, 1e-9);
}

TEST(CompensatedSum, MergeEqualsSequentialWithinRadius) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0, 1);
  nrl::CompensatedSum<double> all, left, right;
  Hp truth = 0;
  for (int i = 0; i < 5000; ++i) {
    const double x = d(rng);
    truth += hp(x);
    all.add(ErrBound::exact(x));
    (i < 2500 ? left : right).add(ErrBound::exact(x));
  }
  left.merge(right);
  EXPECT_TRUE(encloses(left.result(), truth));
  EXPECT_TRUE(encloses(all.result(), truth));
  EXPECT_NEAR(left.result().value, all.result().value, 1e-12);
}

TEST(CompensatedSum, StateRoundTripIsBitwise) {
  nrl::CompensatedSum<double> a;
  for (int i = 1; i < 1000; ++i) a.add(ErrBound::rounded(std::log(i + 1.0)));
  auto b = nrl::CompensatedSum<double>::from_state(a.state());
  a.add(ErrBound::exact(0.125));
  b.add(ErrBound::exact(0.125));
  EXPECT_EQ(a.result().value, b.result().value);
  EXPECT_EQ(a.result().radius, b.result().radius);
  EXPECT_EQ(a.terms(), b.terms());
}
