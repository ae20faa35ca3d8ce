#include "sparse_code/degree_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sparse_code/error.hpp"

namespace sparse_code {

DegreeDistribution::DegreeDistribution(std::vector<Rational> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidParameter("degree distribution needs a nonempty support");
  Rational sum = 0;
  for (const auto& p : probs_) {
    if (p < 0) throw InvalidParameter("negative probability " + to_fraction_string(p));
    sum += p;
  }
  if (sum != 1) {
    throw InvalidParameter("probabilities sum to " + to_fraction_string(sum) + ", not 1");
  }
  cdf_.reserve(probs_.size());
  Rational running = 0;
  for (const auto& p : probs_) {
    running += p;
    cdf_.push_back(running.get_d());
  }
}

DegreeDistribution DegreeDistribution::normalized(std::vector<Rational> weights) {
  Rational sum = 0;
  for (const auto& w : weights) {
    if (w < 0) throw InvalidParameter("negative weight " + to_fraction_string(w));
    sum += w;
  }
  if (sum <= 0) throw InvalidParameter("weights sum to zero");
  for (auto& w : weights) w /= sum;
  return DegreeDistribution(std::move(weights));
}

DegreeDistribution DegreeDistribution::point_mass(std::size_t d, std::size_t degree) {
  if (degree < 1 || degree > d) {
    throw InvalidParameter("point mass degree " + std::to_string(degree) + " outside 1.." +
                           std::to_string(d));
  }
  std::vector<Rational> probs(d, Rational(0));
  probs[degree - 1] = 1;
  return DegreeDistribution(std::move(probs));
}

Rational DegreeDistribution::probability(std::size_t degree) const {
  if (degree < 1 || degree > probs_.size()) return 0;
  return probs_[degree - 1];
}

std::vector<double> DegreeDistribution::as_doubles() const {
  std::vector<double> out;
  out.reserve(probs_.size());
  for (const auto& p : probs_) out.push_back(p.get_d());
  return out;
}

std::size_t DegreeDistribution::sample_degree(Rng& rng) const {
  const double u = uniform_unit(rng) * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto index = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(index, probs_.size() - 1) + 1;
}

Rational wave_soliton_tau() { return Rational(35, 18); }

DegreeDistribution wave_soliton(std::size_t d) {
  if (d < 3) {
    throw UnsupportedSupport("wave soliton needs d >= 3, got " + std::to_string(d));
  }
  const Rational tau = wave_soliton_tau();
  std::vector<Rational> probs(d);
  probs[0] = tau / Rational(static_cast<unsigned long>(d));
  probs[1] = tau / 70;
  for (std::size_t k = 3; k <= d; ++k) {
    probs[k - 1] = tau / Rational(static_cast<unsigned long>(k * (k - 1)));
  }
  return DegreeDistribution(std::move(probs));
}

DegreeDistribution ideal_soliton(std::size_t d) {
  if (d < 1) throw UnsupportedSupport("ideal soliton needs d >= 1");
  std::vector<Rational> probs(d);
  probs[0] = Rational(1, static_cast<unsigned long>(d));
  for (std::size_t k = 2; k <= d; ++k) {
    probs[k - 1] = Rational(1, static_cast<unsigned long>(k * (k - 1)));
  }
  return DegreeDistribution(std::move(probs));
}

DegreeDistribution robust_soliton(std::size_t d, double c, double delta) {
  if (d < 1) throw InvalidParameter("robust soliton needs d >= 1");
  if (!(c > 0) || !(delta > 0) || !(delta < 1)) {
    throw InvalidParameter("robust soliton needs c > 0 and 0 < delta < 1");
  }
  const double dd = static_cast<double>(d);
  const double r = c * std::log(dd / delta) * std::sqrt(dd);
  // The spike sits at floor(d/R); a spike beyond d means only the 1/(k d) ramp
  // contributes inside the support.
  const double ratio = dd / r;
  const std::size_t spike =
      ratio >= dd ? d + 1 : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio)));

  const auto ideal = ideal_soliton(d);
  std::vector<Rational> weights(ideal.probabilities().begin(), ideal.probabilities().end());
  for (std::size_t k = 1; k <= d; ++k) {
    double extra = 0;
    if (k < spike) {
      extra = r / (static_cast<double>(k) * dd);
    } else if (k == spike) {
      extra = std::max(0.0, r * std::log(r / delta) / dd);
    }
    weights[k - 1] += rational_from_double(extra);
  }
  return DegreeDistribution::normalized(std::move(weights));
}

std::vector<std::size_t> sample_support(const DegreeDistribution& p, std::size_t positions,
                                        Rng& rng) {
  if (positions != p.support_size()) {
    throw DimensionMismatch("support positions " + std::to_string(positions) +
                            " differ from distribution size " +
                            std::to_string(p.support_size()));
  }
  const std::size_t degree = p.sample_degree(rng);
  std::vector<std::size_t> pool(positions);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `degree` slots form a uniform subset.
  for (std::size_t i = 0; i < degree; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, positions - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(degree);
  std::sort(pool.begin(), pool.end());
  return pool;
}

GeneratingEvaluation omega_eval(const DegreeDistribution& p, double x) {
  GeneratingEvaluation out;
  out.at = x;
  double power = 1.0;  // x^(k-1)
  const auto probs = p.as_doubles();
  for (std::size_t k = 1; k <= probs.size(); ++k) {
    out.omega_prime += static_cast<double>(k) * probs[k - 1] * power;
    power *= x;
    out.omega += probs[k - 1] * power;
  }
  return out;
}

ExactGeneratingEvaluation omega_eval(const DegreeDistribution& p, const Rational& x) {
  ExactGeneratingEvaluation out{x, 0, 0};
  Rational power = 1;
  const auto probs = p.probabilities();
  for (std::size_t k = 1; k <= probs.size(); ++k) {
    out.omega_prime += Rational(static_cast<unsigned long>(k)) * probs[k - 1] * power;
    power *= x;
    out.omega += probs[k - 1] * power;
  }
  return out;
}

EdgeDegreeEvaluation edge_degree_eval(const DegreeDistribution& p, std::size_t tasks, double x) {
  if (tasks < 1) throw InvalidParameter("edge degree view needs at least one task");
  const double mean = omega_eval(p, 1.0).omega_prime;
  const double d = static_cast<double>(p.support_size());
  EdgeDegreeEvaluation out;
  out.rho = omega_eval(p, x).omega_prime / mean;
  out.lambda = std::pow(1.0 - mean * (1.0 - x) / d, static_cast<double>(tasks - 1));
  return out;
}

Rational mean_degree(const DegreeDistribution& p) { return moment(p, 1); }

Rational moment(const DegreeDistribution& p, unsigned s) {
  if (s < 1) throw InvalidParameter("moment order must be >= 1");
  Rational total = 0;
  const auto probs = p.probabilities();
  for (std::size_t k = 1; k <= probs.size(); ++k) {
    if (probs[k - 1] == 0) continue;
    Integer power;
    mpz_ui_pow_ui(power.get_mpz_t(), k, s);
    total += Rational(power) * probs[k - 1];
  }
  return total;
}

nlohmann::json to_json(const DegreeDistribution& p) {
  nlohmann::json probs = nlohmann::json::array();
  for (const auto& q : p.probabilities()) probs.push_back(to_fraction_string(q));
  return {{"d", p.support_size()}, {"probs", std::move(probs)}};
}

DegreeDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("probs") || !j.at("probs").is_array()) {
    throw InvalidParameter("distribution JSON needs a \"probs\" array");
  }
  std::vector<Rational> probs;
  for (const auto& entry : j.at("probs")) {
    if (entry.is_string()) {
      probs.push_back(parse_rational(entry.get<std::string>()));
    } else if (entry.is_number_integer()) {
      probs.emplace_back(entry.get<long>());
    } else if (entry.is_number()) {
      probs.push_back(rational_from_double(entry.get<double>()));
    } else {
      throw InvalidParameter("probability entries must be strings or numbers");
    }
  }
  if (j.contains("d") && j.at("d").get<std::size_t>() != probs.size()) {
    throw InvalidParameter("\"d\" does not match the number of probabilities");
  }
  return DegreeDistribution(std::move(probs));
}

}  // namespace sparse_code
