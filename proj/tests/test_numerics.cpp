#include <gmodes/numerics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using gmodes::BigFloat;
using gmodes::PrecisionContext;
using gmodes::ScopedPrecision;

TEST(RequiredBits, KnownValues) {
  EXPECT_EQ(gmodes::required_bits(1), 67);   // 64 + ceil(2.27)
  EXPECT_EQ(gmodes::required_bits(10), 87);  // 64 + ceil(22.7)
  EXPECT_EQ(gmodes::required_bits(18), 105);
  EXPECT_EQ(gmodes::required_bits(100), 291);
}

TEST(RequiredBits, RejectsNonPositive) {
  EXPECT_THROW(gmodes::required_bits(0), std::invalid_argument);
  EXPECT_THROW(gmodes::required_bits(-3), std::invalid_argument);
}

TEST(RequiredBits, GuardMarginNeverVanishes) {
  for (int n = 1; n <= 5000; ++n) {
    const int floor_bits = 53 + static_cast<int>(std::ceil(M_PI * n / (2 * std::log(2.0))));
    ASSERT_GE(gmodes::required_bits(n), floor_bits) << "N=" << n;
  }
}

TEST(PrecisionContext, Validation) {
  EXPECT_THROW(PrecisionContext(52, 1e-20, 1e-10), std::invalid_argument);
  EXPECT_THROW(PrecisionContext(961, 1e-20, 1e-10), std::invalid_argument);
  EXPECT_THROW(PrecisionContext(128, 0.0, 1e-10), std::invalid_argument);
  EXPECT_THROW(PrecisionContext(128, 1e-20, -1.0), std::invalid_argument);
  EXPECT_NO_THROW(PrecisionContext(128, 1e-40, 1e-30));
}

TEST(PrecisionContext, ForBitsTolerances) {
  const auto c = PrecisionContext::for_bits(128);
  EXPECT_EQ(c.mantissa_bits, 128);
  EXPECT_EQ(c.abs_tol, std::ldexp(1.0, -144));
  EXPECT_EQ(c.rel_tol, std::ldexp(1.0, -120));
  EXPECT_EQ(PrecisionContext::hardware().mantissa_bits, 53);
}

TEST(BigFloat, ScopedPrecisionControlsNewValues) {
  const int before = gmodes::working_precision();
  {
    ScopedPrecision p(200);
    BigFloat x(1);
    EXPECT_EQ(x.precision(), 200);
    {
      ScopedPrecision q(80);
      EXPECT_EQ(BigFloat(2).precision(), 80);
      BigFloat y = x;  // copies keep their source precision
      EXPECT_EQ(y.precision(), 200);
    }
    EXPECT_EQ(gmodes::working_precision(), 200);
  }
  EXPECT_EQ(gmodes::working_precision(), before);
}

TEST(BigFloat, ArithmeticMatchesDecimalExpansion) {
  ScopedPrecision p(256);
  const BigFloat third = BigFloat(1) / BigFloat(3);
  EXPECT_EQ(third.str(30).substr(0, 20), "0.333333333333333333");
  const BigFloat two = sqrt(BigFloat(2));
  EXPECT_EQ(two.str(40).substr(0, 38), "1.414213562373095048801688724209698078");
  EXPECT_EQ(BigFloat::pi().str(40).substr(0, 38), "3.141592653589793238462643383279502884");
  EXPECT_EQ(to_double(exp(BigFloat(1))), std::exp(1.0));
}

TEST(BigFloat, MoveThenAssign) {
  ScopedPrecision p(128);
  BigFloat a(3);
  BigFloat b(std::move(a));
  a = BigFloat(5);
  BigFloat c(7);
  a = c;
  EXPECT_EQ(to_double(a), 7.0);
  EXPECT_EQ(to_double(b), 3.0);
}

TEST(BigFloat, ParseRejectsGarbage) {
  ScopedPrecision p(128);
  EXPECT_THROW(BigFloat("not a number"), std::invalid_argument);
  EXPECT_EQ(to_double(gmodes::parse_real<BigFloat>("0.125")), 0.125);
  EXPECT_THROW(gmodes::parse_real<double>("1.5x"), std::invalid_argument);
}

TEST(CompensatedSum, DoubleRecoversCancelledTerms) {
  const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(gmodes::compensated_sum(v, PrecisionContext::hardware()), 2.0);
}

TEST(CompensatedSum, DoubleAgreesWithWideReference) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-30, 30);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) v.push_back((sign(rng) ? 1 : -1) * std::exp(mag(rng)));
    // Reference: exact summation in MPFR at 2000 bits, rounded once.
    ScopedPrecision wide(2000);
    BigFloat exact(0);
    for (double t : v) exact += BigFloat(t);
    const double ref = to_double(exact);
    const double got = gmodes::compensated_sum(v, PrecisionContext::hardware());
    const double scale = std::max(std::fabs(ref), 1e-300);
    EXPECT_LE(std::fabs(got - ref) / scale, 1e-15) << "trial " << trial;
  }
}

TEST(CompensatedSum, BigFloatIsCorrectlyRounded) {
  ScopedPrecision p(64);
  const auto ctx = PrecisionContext::for_bits(64);
  std::vector<BigFloat> v{BigFloat(1), ldexp(BigFloat(1), -100), BigFloat(-1)};
  const BigFloat s = gmodes::compensated_sum(v, ctx);
  EXPECT_EQ(s, ldexp(BigFloat(1), -100));
}

TEST(CompensatedSum, HigherPrecisionAgreesWithinFourUlp) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> raw;
    for (int i = 0; i < 60; ++i) raw.push_back(u(rng) * std::pow(10.0, i % 7));
    const int b1 = 80, b2 = 240;
    BigFloat s1, s2;
    {
      ScopedPrecision p(b1);
      std::vector<BigFloat> v(raw.begin(), raw.end());
      s1 = gmodes::compensated_sum(v, PrecisionContext::for_bits(b1));
    }
    {
      ScopedPrecision p(b2);
      std::vector<BigFloat> v(raw.begin(), raw.end());
      s2 = gmodes::compensated_sum(v, PrecisionContext::for_bits(b2));
    }
    ScopedPrecision p(b2);
    const BigFloat diff = abs(BigFloat(s1) - s2);
    EXPECT_LE(diff, BigFloat(4) * ulp(s1)) << "trial " << trial;
  }
}

TEST(CompensatedSum, AccumulatorCarriesGuardBits) {
  ScopedPrecision p(64);
  gmodes::CompensatedAccumulator<BigFloat> acc;
  acc.add(BigFloat(1));
  for (int i = 0; i < 1000; ++i) acc.add(ldexp(BigFloat(1), -70));
  const BigFloat expected = BigFloat(1) + ldexp(BigFloat(1000), -70);
  EXPECT_EQ(acc.value(), expected);
  EXPECT_EQ(acc.value().precision(), 64);
}

TEST(Format, DoubleUsesSeventeenDigits) {
  EXPECT_EQ(gmodes::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(gmodes::parse_real<double>(gmodes::format_real(M_PI)), M_PI);
}
