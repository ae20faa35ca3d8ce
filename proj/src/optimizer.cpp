#include "sparse_code/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "sparse_code/error.hpp"
#include "sparse_code/linear_program.hpp"

namespace sparse_code {

namespace {

constexpr std::size_t kMaxSupport = 40;
constexpr double kRowSlack = 1e-9;      // LP rows are tightened by this much
constexpr double kTargetSlack = 1e-9;   // matching target above p_m
constexpr double kRoundDenominator = 1e12;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double mean_of(std::span<const double> p) {
  double m = 0;
  for (std::size_t k = 0; k < p.size(); ++k) m += static_cast<double>(k + 1) * p[k];
  return m;
}

std::vector<double> mix(std::span<const double> a, std::span<const double> b, double theta) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = (1 - theta) * a[k] + theta * b[k];
  return out;
}

struct Problem {
  const OptimizerConfig& cfg;
  std::size_t support;
  std::vector<DecodabilityRow> rows;
  double target;

  bool linear_ok(std::span<const double> p) const {
    for (const double v : p) {
      if (v < -1e-12) return false;
    }
    if (std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) > 1e-9) return false;
    for (const auto& r : rows) {
      if (dot(r.coeffs, p) < r.threshold) return false;
    }
    return true;
  }

  double matching(std::span<const double> p) const { return matching_probability(p, cfg.d).value; }

  LinearProgram base_lp() const {
    LinearProgram lp;
    lp.objective.resize(support);
    for (std::size_t k = 0; k < support; ++k) lp.objective[k] = static_cast<double>(k + 1);
    lp.add(std::vector<double>(support, 1.0), Sense::equal, 1.0);
    return lp;
  }

  /// Solves `lp` plus the decodability rows, adding grid rows as cuts only
  /// when the current solution violates them. Rows stay in `active` across
  /// calls. The optimum equals the one with every row present.
  LpSolution solve_with_rows(const LinearProgram& lp, std::vector<bool>& active,
                             std::size_t& iterations) const {
    while (true) {
      LinearProgram full = lp;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (active[i]) full.add(rows[i].coeffs, Sense::greater_equal, rows[i].threshold + kRowSlack);
      }
      auto sol = solve_lp(full);
      iterations += sol.iterations;
      if (sol.status != LpStatus::optimal) return sol;
      bool added = false;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!active[i] && rows[i].threshold > 0 && dot(rows[i].coeffs, sol.x) < rows[i].threshold) {
          active[i] = true;
          added = true;
        }
      }
      if (!added) return sol;
    }
  }
};

/// Wave Soliton on the decision support, or uniform when d < 3.
std::vector<double> wave_anchor(std::size_t d, std::size_t support) {
  std::vector<double> w(support, 1.0);
  if (d >= 3) {
    const auto wave = wave_soliton(d).as_doubles();
    std::copy_n(wave.begin(), support, w.begin());
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

/// |q_k - p_k| <= radius, dropping lower bounds that nonnegativity implies.
void add_trust_region(LinearProgram& lp, std::span<const double> p, double radius) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::vector<double> unit(p.size(), 0.0);
    unit[k] = 1.0;
    lp.add(unit, Sense::less_equal, p[k] + radius);
    if (p[k] - radius > 0) lp.add(std::move(unit), Sense::greater_equal, p[k] - radius);
  }
}

}  // namespace

void OptimizerConfig::validate() const {
  if (d < 2) throw InvalidParameter("d must be at least 2");
  if (!(p_m > 0 && p_m < 1)) throw InvalidParameter("p_m must lie strictly between 0 and 1");
  if (!(c0 >= 0)) throw InvalidParameter("c0 must be nonnegative");
  if (b < 1 || b >= d) throw InvalidParameter("b must satisfy 1 <= b < d");
  if (grid_points < 2) throw InvalidParameter("grid_points must be at least 2");
}

nlohmann::json to_json(const OptimizerConfig& cfg) {
  return {{"schema", "sparse-code.optimizer-config.v1"},
          {"d", cfg.d},
          {"p_m", cfg.p_m},
          {"c", cfg.c},
          {"c0", cfg.c0},
          {"b", cfg.b},
          {"grid_points", cfg.grid_points}};
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("d")) throw InvalidParameter("optimizer config needs \"d\"");
  OptimizerConfig cfg;
  try {
    cfg.d = j.at("d").get<std::size_t>();
    cfg.p_m = j.value("p_m", cfg.p_m);
    cfg.c = j.value("c", cfg.c);
    cfg.c0 = j.value("c0", cfg.c0);
    cfg.b = j.value("b", cfg.b);
    cfg.grid_points = j.value("grid_points", cfg.grid_points);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("optimizer config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::size_t optimizer_support(std::size_t d) { return std::min(d, kMaxSupport); }

std::vector<DecodabilityRow> decodability_rows(const OptimizerConfig& cfg) {
  cfg.validate();
  const double d = static_cast<double>(cfg.d);
  const double upper = 1.0 - static_cast<double>(cfg.b) / d;
  const double exponent = 1.0 / static_cast<double>(cfg.d + cfg.c);
  const std::size_t support = optimizer_support(cfg.d);
  std::vector<DecodabilityRow> rows(cfg.grid_points);
  for (std::size_t i = 0; i < cfg.grid_points; ++i) {
    auto& r = rows[i];
    r.x = upper * static_cast<double>(i) / static_cast<double>(cfg.grid_points - 1);
    r.rhs = 1.0 - r.x - cfg.c0 * std::sqrt((1.0 - r.x) / d);
    r.threshold = r.rhs > 0 ? 1.0 - std::pow(r.rhs, exponent) : 1.0;
    r.coeffs.resize(support);
    double power = 1;  // x^(k-1)
    for (std::size_t k = 1; k <= support; ++k) {
      r.coeffs[k - 1] = static_cast<double>(k) * power / d;
      power *= r.x;
    }
  }
  return rows;
}

FeasibilityReport feasibility_report(const DegreeDistribution& p, const OptimizerConfig& cfg) {
  cfg.validate();
  if (p.support_size() != cfg.d) throw DimensionMismatch("distribution support differs from d");
  FeasibilityReport r;
  r.matching_exact = perfect_matching_probability(p);
  r.matching = to_double(r.matching_exact);
  r.matching_margin = r.matching - cfg.p_m;
  r.matching_ok = r.matching_exact >= rational_from_double(cfg.p_m);
  r.decodability = decodability_check(
      p, cfg.d, {DecodabilityForm::strengthened, cfg.b, cfg.grid_points, cfg.c, cfg.c0});
  const auto rows = decodability_rows(cfg);
  r.decodability_ok = true;
  for (const auto& row : rows) {
    const double omega_prime = omega_eval(p, row.x).omega_prime / static_cast<double>(cfg.d);
    const double margin = row.rhs > 0 ? omega_prime - row.threshold : -1.0;
    r.linear_margins.push_back(margin);
    if (margin < -1e-12) r.decodability_ok = false;
  }
  if (r.decodability.min_margin < -1e-12) r.decodability_ok = false;
  r.feasible = r.matching_ok && r.decodability_ok;
  r.mean_degree = mean_degree(p);
  return r;
}

nlohmann::json to_json(const FeasibilityReport& r) {
  return {{"matching_probability", to_fraction_string(r.matching_exact)},
          {"matching_probability_decimal", r.matching},
          {"matching_margin", r.matching_margin},
          {"matching_ok", r.matching_ok},
          {"decodability_ok", r.decodability_ok},
          {"decodability", to_json(r.decodability)},
          {"linear_margins", r.linear_margins},
          {"mean_degree", to_fraction_string(r.mean_degree)},
          {"mean_degree_decimal", to_double(r.mean_degree)},
          {"feasible", r.feasible}};
}

OptimizerResult optimize_distribution(const OptimizerConfig& cfg) {
  cfg.validate();
  Problem prob{cfg, optimizer_support(cfg.d), decodability_rows(cfg), cfg.p_m + kTargetSlack};
  const std::size_t L = prob.support;
  for (const auto& r : prob.rows) {
    if (r.rhs <= 0) {
      std::ostringstream msg;
      msg << "right-hand side 1 - x - c0 sqrt((1-x)/d) is not positive at x = " << r.x;
      throw Infeasible("decodability", msg.str());
    }
  }

  OptimizerResult result{cfg, DegreeDistribution::point_mass(cfg.d, 1), 0, {}, {}, 0, 0, 0, 0};
  std::vector<bool> active(prob.rows.size(), false);
  active.front() = active.back() = true;
  auto run_lp = [&](const LinearProgram& lp) {
    ++result.lp_solves;
    return prob.solve_with_rows(lp, active, result.lp_iterations);
  };

  const auto base = run_lp(prob.base_lp());
  if (base.status != LpStatus::optimal) {
    throw Infeasible("decodability", "linearized decodability rows admit no distribution (" +
                                         status_name(base.status) + ")");
  }
  std::vector<double> p = base.x;

  if (prob.matching(p) < prob.target) {
    // anchor: wave soliton, blended toward the top degree until both families hold
    const auto wave = wave_anchor(cfg.d, L);
    std::vector<double> top(L, 0.0);
    top[L - 1] = 1.0;
    std::optional<std::vector<double>> anchor;
    for (int step = 0; step <= 20 && !anchor; ++step) {
      auto a = mix(wave, top, step / 20.0);
      if (prob.linear_ok(a) && prob.matching(a) >= prob.target) anchor = std::move(a);
    }
    if (!anchor) {
      // fallback: trust-region ascent on the matching probability from the
      // LP point, staying inside the linear rows
      std::vector<double> q = p;
      double value = prob.matching(q);
      double radius = 0.2;
      for (std::size_t it = 0; it < 2000 && radius >= 1e-9 && value < prob.target; ++it) {
        const auto mv = matching_probability(q, cfg.d);
        auto lp = prob.base_lp();
        for (std::size_t k = 0; k < L; ++k) lp.objective[k] = -mv.gradient[k];
        add_trust_region(lp, q, radius);
        const auto step = run_lp(lp);
        bool moved = false;
        if (step.status == LpStatus::optimal) {
          for (double theta = 1; theta >= 1e-4 && !moved; theta *= 0.5) {
            auto cand = mix(q, step.x, theta);
            const double v = prob.matching(cand);
            if (v > value) {
              q = std::move(cand);
              value = v;
              moved = true;
            }
          }
        }
        radius = moved ? std::min(2 * radius, 0.5) : radius * 0.5;
      }
      if (value < prob.target) {
        std::ostringstream msg;
        msg << "largest matching probability found under the decodability rows is " << value
            << " < p_m = " << cfg.p_m;
        throw Infeasible("matching", msg.str());
      }
      anchor = std::move(q);
    }
    double lo = 0;
    double hi = 1;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (prob.matching(mix(p, *anchor, mid)) >= prob.target ? hi : lo) = mid;
    }
    result.mixing = hi;
    p = mix(p, *anchor, hi);

    // trust-region sequential LP on the linearized matching constraint
    double radius = 0.1;
    for (std::size_t it = 0; it < 1000 && radius >= 1e-7; ++it) {
      const auto mv = matching_probability(p, cfg.d);
      const double g_norm = std::accumulate(mv.gradient.begin(), mv.gradient.end(), 0.0,
                                            [](double s, double g) { return s + std::abs(g); });
      const double margin = 0.5 * radius * radius * g_norm;
      auto lp = prob.base_lp();
      lp.add(mv.gradient, Sense::greater_equal,
             prob.target + margin - mv.value + dot(mv.gradient, p));
      add_trust_region(lp, p, radius);
      const auto step = run_lp(lp);
      if (step.status != LpStatus::optimal || step.objective >= mean_of(p) - 1e-12) {
        radius *= 0.5;
        continue;
      }
      double theta = 1;
      while (theta >= 1e-4 && prob.matching(mix(p, step.x, theta)) < prob.target) theta *= 0.5;
      if (theta < 1e-4) {
        radius *= 0.5;
        continue;
      }
      p = mix(p, step.x, theta);
      ++result.refinement_steps;
      radius = std::min(2 * radius, 0.5);
    }
  }

  // exact rational rounding; the sum is repaired on the largest entry
  std::vector<Rational> probs(cfg.d, Rational(0));
  const Integer denom(static_cast<unsigned long>(kRoundDenominator));
  for (std::size_t k = 0; k < L; ++k) {
    const auto num = std::llround(std::max(0.0, p[k]) * kRoundDenominator);
    probs[k] = Rational(Integer(static_cast<long>(num)), denom);
    probs[k].canonicalize();
  }
  const std::size_t largest = static_cast<std::size_t>(
      std::max_element(p.begin(), p.end()) - p.begin());
  Rational total = std::accumulate(probs.begin(), probs.end(), Rational(0));
  probs[largest] += Rational(1) - total;
  result.distribution = DegreeDistribution(std::move(probs));
  result.objective = mean_degree(result.distribution);
  result.report = feasibility_report(result.distribution, cfg);
  if (!result.report.feasible) {
    throw Infeasible(result.report.matching_ok ? "decodability" : "matching",
                     "rounded optimum failed independent re-verification");
  }

  if (result.report.matching_margin < 1e-6) result.active_constraints.push_back("matching");
  for (std::size_t i = 0; i < prob.rows.size(); ++i) {
    if (result.report.linear_margins[i] < 1e-6) {
      std::ostringstream name;
      name << "decodability[x=" << prob.rows[i].x << "]";
      result.active_constraints.push_back(name.str());
    }
  }
  for (std::size_t k = 1; k <= cfg.d; ++k) {
    if (result.distribution.probability(k) == 0) {
      result.active_constraints.push_back("nonnegativity[" + std::to_string(k) + "]");
    }
  }
  return result;
}

nlohmann::json to_json(const OptimizerResult& r) {
  auto decimals = nlohmann::json::array();
  for (const auto& q : r.distribution.probabilities()) decimals.push_back(to_double(q));
  return {{"schema", "sparse-code.optimizer.v1"},
          {"config", to_json(r.config)},
          {"distribution", to_json(r.distribution)},
          {"probs_decimal", decimals},
          {"objective", to_fraction_string(r.objective)},
          {"objective_decimal", to_double(r.objective)},
          {"report", to_json(r.report)},
          {"active_constraints", r.active_constraints},
          {"solver",
           {{"lp_solves", r.lp_solves},
            {"lp_iterations", r.lp_iterations},
            {"refinement_steps", r.refinement_steps},
            {"mixing", r.mixing}}}};
}

}  // namespace sparse_code
