#include "sparse_code/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sparse_code/encoder.hpp"
#include "sparse_code/error.hpp"
#include "sparse_code/parallel.hpp"
#include "sparse_code/random.hpp"

namespace sparse_code {

DegreeEvolution degree_evolution(const DegreeDistribution& p) {
  const std::size_t d = p.support_size();
  DegreeEvolution ev;
  ev.d = d;
  ev.rows.resize(d + 1);
  auto& top = ev.rows[d];
  top.assign(d + 1, Rational(0));
  for (std::size_t k = 1; k <= d; ++k) top[k] = p.probability(k);
  for (std::size_t s = d; s-- > 1;) {
    const auto& above = ev.rows[s + 1];
    auto& row = ev.rows[s];
    row.assign(s + 1, Rational(0));
    const Rational denom(static_cast<unsigned long>(s + 1));
    for (std::size_t k = 0; k <= s; ++k) {
      const Rational kk(static_cast<unsigned long>(k));
      Rational v = above[k] * (Rational(1) - kk / denom);
      v += above[k + 1] * (kk + 1) / denom;
      row[k] = v;
    }
  }
  return ev;
}

Rational zero_degree_probability(const DegreeDistribution& p, std::size_t s) {
  const std::size_t d = p.support_size();
  if (s < 1 || s > d) throw InvalidParameter("subset size must lie in 1..d");
  Rational total = 0;
  Rational ratio = 1;  // C(d-s, k) / C(d, k), updated incrementally
  for (std::size_t k = 1; k <= d - s; ++k) {
    Rational step(static_cast<unsigned long>(d - s - k + 1), static_cast<unsigned long>(d - k + 1));
    step.canonicalize();
    ratio *= step;
    total += p.probability(k) * ratio;
  }
  return total;
}

Rational perfect_matching_probability(const DegreeDistribution& p) {
  const auto ev = degree_evolution(p);
  Rational product = 1;
  for (std::size_t s = 1; s <= ev.d; ++s) product *= Rational(1) - ev.row(s)[0];
  return product;
}

MatchingValue matching_probability(std::span<const double> probs, std::size_t d) {
  const std::size_t support = probs.size();
  if (support == 0 || support > d) throw InvalidParameter("support must lie in 1..d");
  // factor_s = sum_k p_k (1 - a_{s,k}), a_{s,k} = C(d-s, k)/C(d, k)
  std::vector<std::vector<double>> coeff(d, std::vector<double>(support, 1.0));
  std::vector<double> factor(d, 0.0);
  for (std::size_t s = 1; s < d; ++s) {
    double ratio = 1;
    for (std::size_t k = 1; k <= support; ++k) {
      ratio = k <= d - s ? ratio * static_cast<double>(d - s - k + 1) / static_cast<double>(d - k + 1)
                         : 0.0;
      coeff[s][k - 1] = 1.0 - ratio;
      factor[s] += probs[k - 1] * coeff[s][k - 1];
    }
  }
  // prefix[s] = prod_{t<s} factor_t, suffix[s] = prod_{t>s} factor_t, over t in 1..d-1
  std::vector<double> prefix(d + 1, 1.0);
  std::vector<double> suffix(d + 1, 1.0);
  for (std::size_t s = 1; s < d; ++s) prefix[s + 1] = prefix[s] * factor[s];
  for (std::size_t s = d - 1; s >= 1; --s) suffix[s - 1] = suffix[s] * factor[s];
  MatchingValue out;
  out.value = d > 1 ? prefix[d] : 1.0;
  out.gradient.assign(support, 0.0);
  for (std::size_t s = 1; s < d; ++s) {
    const double others = prefix[s] * suffix[s];
    for (std::size_t k = 0; k < support; ++k) out.gradient[k] += coeff[s][k] * others;
  }
  return out;
}

std::string form_name(DecodabilityForm form) {
  return form == DecodabilityForm::peeling ? "peeling" : "strengthened";
}

DecodabilityReport decodability_check(const DegreeDistribution& p, std::size_t K,
                                      const DecodabilityOptions& options) {
  const std::size_t d = p.support_size();
  if (K < 1) throw InvalidParameter("K must be at least 1");
  if (options.b < 1 || options.b >= d) throw InvalidParameter("b must satisfy 1 <= b < d");
  if (options.grid_points < 2) throw InvalidParameter("grid needs at least two points");
  if (options.c0 < 0) throw InvalidParameter("c0 must be nonnegative");
  const double dd = static_cast<double>(d);
  const double frac = static_cast<double>(options.b) / dd;
  DecodabilityReport report;
  report.K = K;
  report.form = options.form;
  report.feasible = true;
  report.min_margin = std::numeric_limits<double>::infinity();
  const auto last = static_cast<double>(options.grid_points - 1);
  for (std::size_t i = 0; i < options.grid_points; ++i) {
    const double t = static_cast<double>(i) / last;
    double x = 0;
    double margin = 0;
    if (options.form == DecodabilityForm::peeling) {
      x = frac + t * (1.0 - frac);
      const double base = 1.0 - omega_eval(p, 1.0 - x).omega_prime / dd;
      margin = x - std::pow(base, static_cast<double>(K - 1));
    } else {
      x = t * (1.0 - frac);
      const double rhs = 1.0 - x - options.c0 * std::sqrt((1.0 - x) / dd);
      const double base = 1.0 - omega_eval(p, x).omega_prime / dd;
      margin = rhs - std::pow(base, static_cast<double>(K + options.c));
    }
    report.grid.push_back(x);
    report.margins.push_back(margin);
    report.min_margin = std::min(report.min_margin, margin);
    if (margin < 0) report.feasible = false;
  }
  return report;
}

nlohmann::json to_json(const DecodabilityReport& report) {
  return {{"K", report.K},
          {"form", form_name(report.form)},
          {"feasible", report.feasible},
          {"min_margin", report.min_margin},
          {"grid", report.grid},
          {"margins", report.margins}};
}

namespace {

std::size_t row_cap(const ThresholdOptions& options, std::size_t mn) {
  return options.max_rows > 0 ? options.max_rows : 64 * mn + 64;
}

template <class DrawRow>
ThresholdTrial threshold_trial(std::size_t mn, std::size_t cap, DrawRow&& draw) {
  EchelonState state(mn);
  std::vector<WeightRow> rows;
  while (!state.full_rank()) {
    if (rows.size() >= cap) {
      throw RankDeficient("no full-rank prefix within " + std::to_string(cap) + " rows");
    }
    rows.push_back(draw());
    state.insert(rows.back());
  }
  std::vector<std::size_t> ids(rows.size());
  std::iota(ids.begin(), ids.end(), 0);
  const auto plan = plan_hybrid_decode(rows, ids, mn);
  ThresholdTrial trial;
  trial.minimal_k = rows.size();
  trial.peeled = plan.peeled;
  trial.rooted = plan.rooted;
  trial.full_rank_at_mn = rows.size() == mn;
  return trial;
}

}  // namespace

ThresholdSummary estimate_recovery_threshold(const DegreeDistribution& p, std::size_t m,
                                             std::size_t n, const ThresholdOptions& options) {
  const std::size_t mn = m * n;
  if (p.support_size() != mn) throw DimensionMismatch("distribution support must equal m*n");
  if (options.trials < 1) throw InvalidParameter("at least one trial is required");
  const WeightSet weights = WeightSet::for_grid(m, n);
  const std::size_t cap = row_cap(options, mn);
  std::vector<ThresholdTrial> trials(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t t) {
    Rng rng = derive_rng(options.seed, t);
    trials[t] = threshold_trial(mn, cap, [&] { return sparse_code_row(p, weights, rng); });
  });
  return summarize_threshold("sparse", mn, options.seed, trials);
}

ThresholdSummary estimate_polynomial_threshold(std::size_t m, std::size_t n,
                                               const ThresholdOptions& options) {
  const std::size_t mn = m * n;
  if (options.trials < 1) throw InvalidParameter("at least one trial is required");
  const std::size_t cap = std::min(row_cap(options, mn), 4 * mn);
  std::vector<ThresholdTrial> trials(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t t) {
    Rng rng = derive_rng(options.seed, t);
    // distinct evaluation points drawn from 1..4mn
    std::vector<std::uint64_t> pool(4 * mn);
    std::iota(pool.begin(), pool.end(), 1);
    std::size_t used = 0;
    trials[t] = threshold_trial(mn, cap, [&] {
      const std::size_t j = used + uniform_below(rng, pool.size() - used);
      std::swap(pool[used], pool[j]);
      return polynomial_row(m, n, Integer(static_cast<unsigned long>(pool[used++])));
    });
  });
  return summarize_threshold("polynomial", mn, options.seed, trials);
}

ThresholdSummary summarize_threshold(std::string code, std::size_t mn, std::uint64_t seed,
                                     std::span<const ThresholdTrial> trials) {
  if (trials.empty()) throw InvalidParameter("no trials to summarize");
  ThresholdSummary s;
  s.code = std::move(code);
  s.mn = mn;
  s.trials = trials.size();
  s.seed = seed;
  double sum = 0;
  double rooted = 0;
  std::size_t at_mn = 0;
  for (const auto& t : trials) {
    sum += static_cast<double>(t.minimal_k);
    rooted += static_cast<double>(t.rooted);
    at_mn += t.full_rank_at_mn ? 1 : 0;
    ++s.k_histogram[t.minimal_k];
    ++s.rooting_histogram[t.rooted];
  }
  const double count = static_cast<double>(trials.size());
  s.mean = sum / count;
  s.mean_rooted = rooted / count;
  s.full_rank_at_mn_rate = static_cast<double>(at_mn) / count;
  if (trials.size() > 1) {
    double sq = 0;
    for (const auto& t : trials) sq += std::pow(static_cast<double>(t.minimal_k) - s.mean, 2);
    s.stddev = std::sqrt(sq / (count - 1));
  }
  return s;
}

namespace {

nlohmann::json histogram_json(const std::map<std::size_t, std::size_t>& h, const char* key) {
  auto out = nlohmann::json::array();
  for (const auto& [value, count] : h) out.push_back({{key, value}, {"count", count}});
  return out;
}

}  // namespace

nlohmann::json to_json(const ThresholdSummary& s) {
  return {{"schema", "sparse-code.threshold.v1"},
          {"code", s.code},
          {"mn", s.mn},
          {"trials", s.trials},
          {"seed", s.seed},
          {"mean_k", s.mean},
          {"std_k", s.stddev},
          {"overhead", s.mean / static_cast<double>(s.mn)},
          {"mean_rooted", s.mean_rooted},
          {"full_rank_at_mn_rate", s.full_rank_at_mn_rate},
          {"k_histogram", histogram_json(s.k_histogram, "K")},
          {"rooting_histogram", histogram_json(s.rooting_histogram, "rooted")}};
}

std::string histogram_csv(const std::map<std::size_t, std::size_t>& histogram,
                          const std::string& key) {
  std::ostringstream out;
  out << key << ",count\n";
  for (const auto& [value, count] : histogram) out << value << ',' << count << '\n';
  return out.str();
}

}  // namespace sparse_code
