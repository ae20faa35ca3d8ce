#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparse_code/analysis.hpp"
#include "sparse_code/error.hpp"

using namespace sparse_code;

TEST(Analysis, DegreeEvolutionRowsAreDistributions) {
  for (std::size_t d : {3u, 6u, 12u}) {
    const auto p = wave_soliton(d);
    const auto ev = degree_evolution(p);
    for (std::size_t s = 1; s <= d; ++s) {
      Rational sum(0);
      for (const auto& v : ev.row(s)) {
        EXPECT_GE(v, 0);
        sum += v;
      }
      EXPECT_EQ(sum, 1) << "d=" << d << " s=" << s;
      EXPECT_EQ(ev.row(s).size(), s + 1);
    }
    EXPECT_EQ(ev.row(d)[0], 0);
  }
}

TEST(Analysis, RecursionAgreesWithClosedForm) {
  for (std::size_t d : {3u, 5u, 9u, 16u}) {
    const auto p = robust_soliton(d, 0.1, 0.5);
    const auto ev = degree_evolution(p);
    for (std::size_t s = 1; s <= d; ++s) {
      EXPECT_EQ(ev.row(s)[0], zero_degree_probability(p, s)) << d << " " << s;
    }
  }
}

TEST(Analysis, HypergeometricLawOfTheEvolution) {
  // a degree-k task meets a fixed s-subset in j blocks with probability
  // C(k,j) C(d-k,s-j) / C(d,s)
  const std::size_t d = 7;
  const auto p = DegreeDistribution::point_mass(d, 3);
  const auto ev = degree_evolution(p);
  auto bin = [](unsigned long n, unsigned long k) {
    Integer out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return Rational(out);
  };
  for (std::size_t s = 1; s <= d; ++s) {
    for (std::size_t j = 0; j <= s; ++j) {
      const Rational expect = (j <= 3 && s - j <= d - 3)
                                  ? bin(3, j) * bin(d - 3, s - j) / bin(d, s)
                                  : Rational(0);
      EXPECT_EQ(ev.row(s)[j], expect) << s << " " << j;
    }
  }
}

TEST(Analysis, MatchingSingletonCase) {
  const DegreeDistribution p({Rational(1), Rational(0), Rational(0)});
  EXPECT_EQ(perfect_matching_probability(p), Rational(2, 9));
  EXPECT_EQ(oracle::matching_by_enumeration({Rational(1), Rational(0), Rational(0)}), Rational(2, 9));
}

TEST(Analysis, MatchingEnumerationOracleSanity) {
  // d = 2, p = (q, 1-q): fails only when both tasks are the same singleton
  const Rational q(1, 3);
  EXPECT_EQ(oracle::matching_by_enumeration({q, 1 - q}), 1 - q * q / 2);
  // all tasks full: always matched
  EXPECT_EQ(oracle::matching_by_enumeration({Rational(0), Rational(0), Rational(1)}), 1);
}

TEST(Analysis, FloatingMatchingAgreesWithExact) {
  for (std::size_t d : {3u, 6u, 10u}) {
    const auto p = wave_soliton(d);
    const auto probs = p.as_doubles();
    const auto mv = matching_probability(probs, d);
    EXPECT_NEAR(mv.value, to_double(perfect_matching_probability(p)), 1e-12);
  }
}

TEST(Analysis, MatchingGradientMatchesFiniteDifferences) {
  const std::vector<double> probs = {0.2, 0.5, 0.1, 0.1, 0.1};
  const auto mv = matching_probability(probs, 5);
  ASSERT_EQ(mv.gradient.size(), probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    auto up = probs, down = probs;
    up[k] += 1e-6;
    down[k] -= 1e-6;
    const double fd = (matching_probability(up, 5).value - matching_probability(down, 5).value) / 2e-6;
    EXPECT_NEAR(mv.gradient[k], fd, 1e-6) << k;
  }
}

TEST(Analysis, DecodabilityMarginsFollowTheFormula) {
  const auto p = wave_soliton(16);
  DecodabilityOptions opts;
  opts.grid_points = 11;
  const auto rep = decodability_check(p, 20, opts);
  ASSERT_EQ(rep.grid.size(), 11u);
  EXPECT_NEAR(rep.grid.front(), 2.0 / 16, 1e-15);
  EXPECT_NEAR(rep.grid.back(), 1.0, 1e-15);
  const auto probs = p.as_doubles();
  for (std::size_t i = 0; i < rep.grid.size(); ++i) {
    const double x = rep.grid[i];
    double op = 0;  // Omega'(1-x)
    for (std::size_t k = 1; k <= 16; ++k) op += k * probs[k - 1] * std::pow(1 - x, double(k - 1));
    EXPECT_NEAR(rep.margins[i], x - std::pow(1 - op / 16, 19), 1e-12);
  }
  double lo = rep.margins.front();
  for (double m : rep.margins) lo = std::min(lo, m);
  EXPECT_EQ(rep.min_margin, lo);
  EXPECT_EQ(rep.feasible, lo >= 0);
}

TEST(Analysis, DecodabilityImprovesWithMoreTasks) {
  const auto p = wave_soliton(25);
  const auto few = decodability_check(p, 10);
  const auto many = decodability_check(p, 200);
  EXPECT_LT(few.min_margin, many.min_margin);
  EXPECT_THROW(decodability_check(p, 0), InvalidParameter);
  DecodabilityOptions bad;
  bad.b = 25;
  EXPECT_THROW(decodability_check(p, 10, bad), InvalidParameter);
}

TEST(Analysis, ThresholdIsDeterministicAndThreadIndependent) {
  ThresholdOptions a;
  a.trials = 60;
  a.seed = 7;
  a.threads = 1;
  ThresholdOptions b = a;
  b.threads = 4;
  const auto p = wave_soliton(16);
  const auto x = estimate_recovery_threshold(p, 4, 4, a);
  const auto y = estimate_recovery_threshold(p, 4, 4, b);
  EXPECT_EQ(to_json(x).dump(), to_json(y).dump());
  EXPECT_GE(x.mean, 16.0);
  std::size_t total = 0;
  for (const auto& [k, count] : x.k_histogram) {
    EXPECT_GE(k, 16u);
    total += count;
  }
  EXPECT_EQ(total, 60u);
  EXPECT_EQ(to_json(x)["schema"], "sparse-code.threshold.v1");
}

TEST(Analysis, PolynomialThresholdIsExactlyMn) {
  ThresholdOptions o;
  o.trials = 20;
  const auto s = estimate_polynomial_threshold(3, 3, o);
  EXPECT_EQ(s.mean, 9.0);
  EXPECT_EQ(s.stddev, 0.0);
}

TEST(Analysis, HistogramCsv) {
  EXPECT_EQ(histogram_csv({{16, 3}, {18, 1}}), "K,count\n16,3\n18,1\n");
}

TEST(Analysis, PublishedSixBlockVectorSitsNearFifteenPercent) {
  const DegreeDistribution p({parse_rational("0.0217"), parse_rational("0.9390"), parse_rational("0.0393"),
                              Rational(0), Rational(0), Rational(0)});
  const double q = to_double(perfect_matching_probability(p));
  EXPECT_NEAR(q, 0.149995, 1e-5);
  EXPECT_LT(q, 0.5);
}
