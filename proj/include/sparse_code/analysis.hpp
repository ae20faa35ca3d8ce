#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparse_code/decoder.hpp"
#include "sparse_code/degree_distribution.hpp"
#include "sparse_code/rational.hpp"

namespace sparse_code {

/// Degree of a task restricted to a random s-subset of the d blocks.
/// row(s)[k] = p_k^(s) for k = 0..s; row(d) is P itself with p_0 = 0.
struct DegreeEvolution {
  std::size_t d = 0;
  std::vector<std::vector<Rational>> rows;  // index s = 0..d, rows[0] unused

  const std::vector<Rational>& row(std::size_t s) const { return rows.at(s); }
};

/// p_k^(s) = p_k^(s+1) (1 - k/(s+1)) + p_{k+1}^(s+1) (k+1)/(s+1), from s = d
/// down to 1, exactly.
DegreeEvolution degree_evolution(const DegreeDistribution& p);

/// Closed form of p_0^(s): sum_k p_k C(d-s, k) / C(d, k). Cross-checks the
/// recursion.
Rational zero_degree_probability(const DegreeDistribution& p, std::size_t s);

/// prod_{s=1..d} (1 - p_0^(s)).
Rational perfect_matching_probability(const DegreeDistribution& p);

struct MatchingValue {
  double value = 0;
  std::vector<double> gradient;  // d/dp_k for k = 1..p.size()
};

/// Floating-point matching probability for degrees 1..probs.size() over d
/// blocks (probs need not be normalized), with its exact gradient. Each factor
/// 1 - p_0^(s) is affine in p, so the gradient is a sum of leave-one-out
/// products.
MatchingValue matching_probability(std::span<const double> probs, std::size_t d);

enum class DecodabilityForm {
  peeling,       // x - [1 - Omega'(1-x)/d]^(K-1) on [b/d, 1]
  strengthened,  // 1 - x - c0 sqrt((1-x)/d) - [1 - Omega'(x)/d]^(K+c) on [0, 1-b/d]
};

std::string form_name(DecodabilityForm form);

struct DecodabilityOptions {
  DecodabilityForm form = DecodabilityForm::peeling;
  std::size_t b = 2;
  std::size_t grid_points = 200;
  std::size_t c = 2;
  double c0 = 0;
};

struct DecodabilityReport {
  std::size_t K = 0;
  DecodabilityForm form = DecodabilityForm::peeling;
  std::vector<double> grid;
  std::vector<double> margins;
  bool feasible = false;
  double min_margin = 0;
};

/// Throws InvalidParameter unless K >= 1, 1 <= b < d and grid_points >= 2.
DecodabilityReport decodability_check(const DegreeDistribution& p, std::size_t K,
                                      const DecodabilityOptions& options = {});

nlohmann::json to_json(const DecodabilityReport& report);

struct ThresholdOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  /// Rows drawn before giving up on a trial; 0 means 64 mn + 64.
  std::size_t max_rows = 0;
};

struct ThresholdTrial {
  std::size_t minimal_k = 0;
  std::size_t peeled = 0;
  std::size_t rooted = 0;
  bool full_rank_at_mn = false;
};

struct ThresholdSummary {
  std::string code;
  std::size_t mn = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mean = 0;
  double stddev = 0;
  double mean_rooted = 0;
  double full_rank_at_mn_rate = 0;
  std::map<std::size_t, std::size_t> k_histogram;
  std::map<std::size_t, std::size_t> rooting_histogram;
};

/// Per trial: streams sparse-code rows until the coefficient matrix reaches
/// rank mn, records that K, then replays the hybrid decoder on the structure to
/// count rooting steps. Throws RankDeficient if a trial exceeds max_rows.
ThresholdSummary estimate_recovery_threshold(const DegreeDistribution& p, std::size_t m,
                                             std::size_t n, const ThresholdOptions& options = {});

/// Same protocol with polynomial-code rows at distinct random points.
ThresholdSummary estimate_polynomial_threshold(std::size_t m, std::size_t n,
                                               const ThresholdOptions& options = {});

ThresholdSummary summarize_threshold(std::string code, std::size_t mn, std::uint64_t seed,
                                     std::span<const ThresholdTrial> trials);

nlohmann::json to_json(const ThresholdSummary& summary);
/// "K,count" header then one row per observed value.
std::string histogram_csv(const std::map<std::size_t, std::size_t>& histogram,
                          const std::string& key = "K");

}  // namespace sparse_code
