#include <gtest/gtest.h>

#include <cmath>

#include "sparse_code/degree_distribution.hpp"
#include "sparse_code/error.hpp"

using namespace sparse_code;

namespace {

Rational harmonic(std::size_t k) {
  Rational h(0);
  for (std::size_t i = 1; i <= k; ++i) h += Rational(1) / Rational(i);
  return h;
}

Rational sum(const DegreeDistribution& p) {
  Rational s(0);
  for (const auto& v : p.probabilities()) s += v;
  return s;
}

}  // namespace

TEST(DegreeDistribution, WaveSolitonSmallCase) {
  const auto p = wave_soliton(4);
  const Rational tau(35, 18);
  EXPECT_EQ(p.probability(1), tau / 4);
  EXPECT_EQ(p.probability(2), tau / 70);
  EXPECT_EQ(p.probability(3), tau / 6);
  EXPECT_EQ(p.probability(4), tau / 12);
  EXPECT_EQ(sum(p), 1);
  EXPECT_THROW(wave_soliton(2), UnsupportedSupport);
}

TEST(DegreeDistribution, WaveSolitonNormalizedAndMeanClosedForm) {
  const Rational tau = wave_soliton_tau();
  for (std::size_t d : {3u, 5u, 16u, 25u, 100u}) {
    const auto p = wave_soliton(d);
    EXPECT_EQ(sum(p), 1) << d;
    const Rational expected =
        tau * (Rational(1) / Rational(d) + Rational(1, 35) + harmonic(d - 1) - 1);
    EXPECT_EQ(mean_degree(p), expected) << d;
  }
}

TEST(DegreeDistribution, RejectsBadInput) {
  EXPECT_THROW(DegreeDistribution({}), InvalidParameter);
  EXPECT_THROW(DegreeDistribution({Rational(1, 2), Rational(1, 3)}), InvalidParameter);
  EXPECT_THROW(DegreeDistribution({Rational(3, 2), Rational(-1, 2)}), InvalidParameter);
  EXPECT_THROW(DegreeDistribution::normalized({Rational(0), Rational(0)}), InvalidParameter);
}

TEST(DegreeDistribution, NormalizedAndPointMass) {
  const auto p = DegreeDistribution::normalized({Rational(1), Rational(3)});
  EXPECT_EQ(p.probability(2), Rational(3, 4));
  EXPECT_EQ(p.probability(3), 0);
  const auto q = DegreeDistribution::point_mass(5, 2);
  EXPECT_EQ(mean_degree(q), 2);
  EXPECT_EQ(moment(q, 2), 4);
}

TEST(DegreeDistribution, RobustAndIdealSolitonSumToOne) {
  for (std::size_t d : {4u, 16u, 50u}) {
    EXPECT_EQ(sum(ideal_soliton(d)), 1);
    EXPECT_EQ(sum(robust_soliton(d, 0.1, 0.5)), 1);
  }
  EXPECT_EQ(ideal_soliton(4).probability(1), Rational(1, 4));
  EXPECT_EQ(ideal_soliton(4).probability(3), Rational(1, 6));
}

TEST(DegreeDistribution, SamplingFollowsTheLaw) {
  const auto p = wave_soliton(8);
  Rng rng = derive_rng(3, 0);
  std::vector<double> counts(9, 0);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) ++counts[p.sample_degree(rng)];
  const auto probs = p.as_doubles();
  for (std::size_t k = 1; k <= 8; ++k) {
    const double expect = probs[k - 1] * draws;
    EXPECT_NEAR(counts[k], expect, 5 * std::sqrt(expect) + 5) << k;
  }
}

TEST(DegreeDistribution, SampleSupportIsSortedAndDistinct) {
  const auto p = wave_soliton(10);
  Rng rng = derive_rng(4, 0);
  for (int i = 0; i < 500; ++i) {
    const auto s = sample_support(p, 10, rng);
    ASSERT_FALSE(s.empty());
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(s[k - 1], s[k]);
    EXPECT_LT(s.back(), 10u);
  }
}

TEST(DegreeDistribution, GeneratingFunctionAgreesExactAndFloat) {
  const auto p = wave_soliton(6);
  const auto e = omega_eval(p, Rational(1, 3));
  const auto f = omega_eval(p, 1.0 / 3);
  EXPECT_NEAR(to_double(e.omega), f.omega, 1e-14);
  EXPECT_NEAR(to_double(e.omega_prime), f.omega_prime, 1e-14);
  EXPECT_EQ(omega_eval(p, Rational(1)).omega, 1);
  EXPECT_EQ(omega_eval(p, Rational(1)).omega_prime, mean_degree(p));
}

TEST(DegreeDistribution, JsonRoundTrip) {
  const auto p = robust_soliton(9, 0.1, 0.5);
  EXPECT_EQ(distribution_from_json(to_json(p)), p);
  EXPECT_THROW(distribution_from_json(nlohmann::json{{"d", 2}, {"probs", {"1/2"}}}), Error);
}

TEST(DegreeDistribution, SecondMomentGrowsLikeTauTimesD) {
  const double tau = 35.0 / 18;
  for (std::size_t d : {256u, 512u}) {
    const double ratio = to_double(moment(wave_soliton(d), 2)) / double(d);
    EXPECT_NEAR(ratio, tau, 0.1 * tau) << d;
  }
  EXPECT_EQ(moment(DegreeDistribution::point_mass(4, 1), 3), 1);
}
