#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "sparse_code/random.hpp"
#include "sparse_code/rational.hpp"

namespace sparse_code {

/// Law of the number of nonzero weights in a coded task, over degrees 1..d.
/// Probabilities are exact rationals summing to exactly one.
class DegreeDistribution {
 public:
  /// probs[k-1] is the probability of degree k. Throws InvalidParameter on a
  /// negative entry, an empty vector, or a sum different from one.
  explicit DegreeDistribution(std::vector<Rational> probs);

  /// Divides nonnegative weights by their (positive) sum.
  static DegreeDistribution normalized(std::vector<Rational> weights);
  static DegreeDistribution point_mass(std::size_t d, std::size_t degree);

  std::size_t support_size() const { return probs_.size(); }
  /// Probability of `degree` (1-based); zero outside 1..d.
  Rational probability(std::size_t degree) const;
  std::span<const Rational> probabilities() const { return probs_; }
  std::vector<double> as_doubles() const;

  /// Inverse-CDF draw of a degree in 1..d.
  std::size_t sample_degree(Rng& rng) const;

  friend bool operator==(const DegreeDistribution& a, const DegreeDistribution& b) {
    return a.probs_ == b.probs_;
  }

 private:
  std::vector<Rational> probs_;
  std::vector<double> cdf_;
};

/// 35/18, the Wave Soliton normalizer.
Rational wave_soliton_tau();

/// p_1 = tau/d, p_2 = tau/70, p_k = tau/(k(k-1)) for 3 <= k <= d.
/// Throws UnsupportedSupport for d < 3.
DegreeDistribution wave_soliton(std::size_t d);

/// rho_1 = 1/d, rho_k = 1/(k(k-1)).
DegreeDistribution ideal_soliton(std::size_t d);

/// Luby's robust soliton: ideal soliton plus the spike term with
/// R = c ln(d/delta) sqrt(d), renormalized exactly.
DegreeDistribution robust_soliton(std::size_t d, double c, double delta);

/// Degree l ~ P, then a uniform l-subset of {0..positions-1}; sorted.
std::vector<std::size_t> sample_support(const DegreeDistribution& p, std::size_t positions,
                                        Rng& rng);

struct GeneratingEvaluation {
  double at = 0;
  double omega = 0;        // sum p_k x^k
  double omega_prime = 0;  // sum k p_k x^(k-1)
};

struct ExactGeneratingEvaluation {
  Rational at;
  Rational omega;
  Rational omega_prime;
};

GeneratingEvaluation omega_eval(const DegreeDistribution& p, double x);
ExactGeneratingEvaluation omega_eval(const DegreeDistribution& p, const Rational& x);

/// Edge-perspective views for K collected tasks:
/// rho(x) = Omega'(x)/Omega'(1) and lambda(x) = [1 - Omega'(1)(1-x)/d]^(K-1).
struct EdgeDegreeEvaluation {
  double lambda = 0;
  double rho = 0;
};
EdgeDegreeEvaluation edge_degree_eval(const DegreeDistribution& p, std::size_t tasks, double x);

Rational mean_degree(const DegreeDistribution& p);
/// sum k^s p_k, s >= 1.
Rational moment(const DegreeDistribution& p, unsigned s);

/// {"d": int, "probs": ["n/d", ...]}
nlohmann::json to_json(const DegreeDistribution& p);
DegreeDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace sparse_code
