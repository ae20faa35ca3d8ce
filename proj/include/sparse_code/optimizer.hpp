#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparse_code/analysis.hpp"
#include "sparse_code/degree_distribution.hpp"
#include "sparse_code/rational.hpp"

namespace sparse_code {

struct OptimizerConfig {
  std::size_t d = 6;
  double p_m = 0.15;  // matching-probability floor
  std::size_t c = 2;  // extra rows in the decodability exponent
  double c0 = 0.1;
  std::size_t b = 2;
  std::size_t grid_points = 200;

  /// Throws InvalidParameter on a config outside 0 < p_m < 1, c0 >= 0,
  /// 1 <= b < d, grid_points >= 2.
  void validate() const;
};

nlohmann::json to_json(const OptimizerConfig& cfg);
/// Missing keys keep their defaults; "d" is required.
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

/// Decision variables: p_1..p_L with L = min(d, 40).
std::size_t optimizer_support(std::size_t d);

/// 1 - x - c0 sqrt((1-x)/d) and the (d+c)-th root threshold on Omega'(x)/d.
struct DecodabilityRow {
  double x = 0;
  double rhs = 0;        // may be <= 0, which makes the row unsatisfiable
  double threshold = 0;  // 1 - rhs^(1/(d+c)) when rhs > 0
  std::vector<double> coeffs;  // k x^(k-1) / d for k = 1..L
};

std::vector<DecodabilityRow> decodability_rows(const OptimizerConfig& cfg);

struct FeasibilityReport {
  Rational matching_exact;
  double matching = 0;
  double matching_margin = 0;  // matching - p_m
  bool matching_ok = false;
  DecodabilityReport decodability;  // strengthened form, K = d
  std::vector<double> linear_margins;  // Omega'(x)/d - threshold per grid point
  bool decodability_ok = false;
  bool feasible = false;
  Rational mean_degree;
};

/// Evaluates both constraint families for P. Throws DimensionMismatch when
/// P's support differs from cfg.d.
FeasibilityReport feasibility_report(const DegreeDistribution& p, const OptimizerConfig& cfg);

nlohmann::json to_json(const FeasibilityReport& report);

struct OptimizerResult {
  OptimizerConfig config;
  DegreeDistribution distribution;
  Rational objective;  // mean degree, exact
  FeasibilityReport report;
  std::vector<std::string> active_constraints;
  std::size_t lp_solves = 0;
  std::size_t lp_iterations = 0;
  std::size_t refinement_steps = 0;
  double mixing = 0;  // weight on the anchor after the bisection stage
};

/// Minimizes the mean degree under the matching floor and the linearized
/// decodability rows. Stages: the LP without the matching constraint; if that
/// misses the floor, bisection on the mix toward a feasible anchor (Wave
/// Soliton, or Wave Soliton blended with the top degree); then trust-region
/// sequential LP on the linearized matching constraint with a feasibility
/// line search. The rounded result is re-verified exactly.
/// Throws Infeasible naming "decodability" or "matching".
OptimizerResult optimize_distribution(const OptimizerConfig& cfg);

nlohmann::json to_json(const OptimizerResult& result);

}  // namespace sparse_code
