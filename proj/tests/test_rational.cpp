#include <gtest/gtest.h>

#include "sparse_code/error.hpp"
#include "sparse_code/random.hpp"
#include "sparse_code/rational.hpp"

using namespace sparse_code;

TEST(Rational, FractionStringAlwaysHasDenominator) {
  EXPECT_EQ(to_fraction_string(Rational(0)), "0/1");
  EXPECT_EQ(to_fraction_string(Rational(3)), "3/1");
  EXPECT_EQ(to_fraction_string(parse_rational("-6/8")), "-3/4");
}

TEST(Rational, ParsesFractionsIntegersAndDecimals) {
  EXPECT_EQ(parse_rational("2/9"), Rational(2, 9));
  EXPECT_EQ(parse_rational("-7"), Rational(-7));
  EXPECT_EQ(parse_rational("-0.0217"), Rational(-217, 10000));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_ANY_THROW(parse_rational("abc"));
  EXPECT_ANY_THROW(parse_rational("1/0"));
}

TEST(Rational, DoubleConversionIsExact) {
  for (double v : {0.1, -2.5, 1e-300, 123456789.125}) {
    EXPECT_EQ(to_double(rational_from_double(v)), v);
  }
  EXPECT_EQ(rational_from_double(0.5), Rational(1, 2));
}

TEST(Random, DerivedStreamsAreReproducibleAndDistinct) {
  Rng a = derive_rng(5, 1), b = derive_rng(5, 1), c = derive_rng(5, 2);
  const auto x = a(), y = b(), z = c();
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
}

TEST(Random, UniformBelowStaysInRange) {
  Rng rng = derive_rng(1, 0);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[uniform_below(rng, 7)];
  for (int h : hits) {
    EXPECT_GT(h, 850);
    EXPECT_LT(h, 1150);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform_unit(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
