// End-to-end acceptance checks. Usage: acceptance [N ...]; no argument runs
// all ten. Prints one PASS/FAIL line per check and exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sparse_code/analysis.hpp"
#include "sparse_code/decoder.hpp"
#include "sparse_code/encoder.hpp"
#include "sparse_code/optimizer.hpp"
#include "sparse_code/parallel.hpp"
#include "sparse_code/simulation.hpp"

using namespace sparse_code;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

WeightRow unit_row(std::initializer_list<std::size_t> cols) {
  WeightRow row;
  for (auto c : cols) row.push_back({c, Integer(1)});
  return row;
}

// 1. worked 2x2 example, both with structure and with real block payloads
Outcome worked_example() {
  Rng rng = derive_rng(2024, 0);
  const auto a = convert<Rational>(generate_random_sparse(12, 6, 30, ValueLaw::integer, rng));
  const auto b = convert<Rational>(generate_random_sparse(12, 6, 30, ValueLaw::integer, rng));
  BlockProducts<Rational> blocks(a, b, 2, 2);
  const std::vector<WeightRow> all = {unit_row({0, 1}), unit_row({1, 2}), unit_row({0}),
                                      unit_row({1, 3}), unit_row({2, 3}), unit_row({0, 2})};
  auto make = [&](std::vector<std::size_t> ids) {
    std::vector<ExactCodedTask> tasks;
    for (auto id : ids) {
      CostTally t;
      tasks.push_back({id, all[id - 1], evaluate_task(all[id - 1], blocks, t), 0});
    }
    return tasks;
  };
  const auto truth = block_product(a, b);
  std::ostringstream why;
  bool ok = true;

  const auto first = hybrid_decode<Rational>(make({1, 3, 4, 5}), 2, 2);
  const std::vector<std::size_t> order = {0, 1, 3, 2};  // C11, C12, C22, C21
  ok &= first.stats.recovery_order == order && first.stats.rooted == 0;
  ok &= first.blocks.assemble(6, 6) == truth;
  why << "{1,3,4,5}: rooted=" << first.stats.rooted << " order=";
  for (auto c : first.stats.recovery_order) why << c;

  DecodeOptions opts;
  opts.pick_root = scripted_roots({1});  // A1^T B2
  const auto second = hybrid_decode<Rational>(make({1, 2, 6, 5}), 2, 2, opts);
  const std::vector<Rational> u = {Rational(1, 2), Rational(1, 2), Rational(-1, 2), Rational(0)};
  ok &= second.stats.rooted == 1 && second.rootings.size() == 1;
  ok &= !second.rootings.empty() && second.rootings[0].column == 1 && second.rootings[0].coefficients == u;
  ok &= second.blocks.assemble(6, 6) == truth;
  why << "; {1,2,6,5}: rooted=" << second.stats.rooted << " u=(";
  if (!second.rootings.empty()) {
    for (std::size_t k = 0; k < second.rootings[0].coefficients.size(); ++k) {
      why << (k ? "," : "") << to_fraction_string(second.rootings[0].coefficients[k]);
    }
  }
  why << ")";
  return {ok, why.str()};
}

// 2. 100 seeded trials at m = n = 4, N = 20, s = 2 decode exactly
Outcome end_to_end() {
  Rng ra = derive_rng(1, 1), rb = derive_rng(1, 2);
  const auto a = generate_random_sparse(400, 400, 4000, ValueLaw::integer, ra);
  const auto b = generate_random_sparse(400, 400, 4000, ValueLaw::integer, rb);
  const auto truth = oracle::dense_product(a, b);
  WorkerModel model;
  model.workers = 20;
  model.stragglers = 2;
  const SchemeSpec spec{Scheme::sparse, wave_soliton(16), 0};
  std::vector<int> good(100, 0);
  parallel_for(100, 0, [&](std::size_t t) {
    Rng rng = derive_rng(2, t);
    const auto r = run_trial(spec, a, b, 4, 4, model, rng);
    good[t] = oracle::equals_dense(r.product, truth) ? 1 : 0;
  });
  const int total = std::accumulate(good.begin(), good.end(), 0);
  return {total == 100, std::to_string(total) + "/100 exact"};
}

// 3. closed-form matching probability vs exhaustive enumeration
Outcome matching_oracle() {
  Rng rng = derive_rng(3, 0);
  std::size_t checked = 0, equal = 0;
  std::ostringstream why;
  bool first_mismatch = true;
  for (std::size_t d : {2u, 3u, 4u}) {
    std::vector<std::vector<Rational>> cases;
    for (std::size_t k = 1; k <= d; ++k) {
      std::vector<Rational> p(d, Rational(0));
      p[k - 1] = 1;
      cases.push_back(p);
    }
    cases.push_back(std::vector<Rational>(d, Rational(1) / Rational(d)));
    while (cases.size() < 12) {
      std::vector<Rational> w(d);
      for (auto& x : w) x = Rational(static_cast<long>(uniform_below(rng, 7)));
      if (w[0] == 0) w[0] = 1;
      const auto p = DegreeDistribution::normalized(w);
      cases.emplace_back(p.probabilities().begin(), p.probabilities().end());
    }
    for (const auto& probs : cases) {
      const Rational formula = perfect_matching_probability(DegreeDistribution(probs));
      const Rational exact = oracle::matching_by_enumeration(probs);
      ++checked;
      if (formula == exact) {
        ++equal;
      } else if (first_mismatch) {
        first_mismatch = false;
        why << "; first mismatch d=" << d << " p=(";
        for (std::size_t k = 0; k < d; ++k) why << (k ? "," : "") << to_fraction_string(probs[k]);
        why << ") formula=" << to_fraction_string(formula) << " enumeration=" << to_fraction_string(exact);
      }
    }
  }
  const DegreeDistribution singleton({Rational(1), Rational(0), Rational(0)});
  const bool two_ninths = perfect_matching_probability(singleton) == Rational(2, 9);
  std::ostringstream head;
  head << equal << "/" << checked << " equal, p1=1 d=3 -> "
       << to_fraction_string(perfect_matching_probability(singleton)) << why.str();
  return {equal == checked && two_ninths, head.str()};
}

// 4. Wave Soliton sums and mean degree, exactly
Outcome wave_identities() {
  const Rational tau(35, 18);
  Rational harmonic(0);  // H_{d-1}
  harmonic += 1;         // H_1, d = 2
  harmonic += Rational(1, 2);
  std::size_t bad = 0;
  for (std::size_t d = 3; d <= 512; ++d) {
    const auto p = wave_soliton(d);
    Rational sum(0);
    for (const auto& v : p.probabilities()) sum += v;
    const Rational expect = tau * (Rational(1) / Rational(d) + Rational(1, 35) + harmonic - 1);
    if (sum != 1 || mean_degree(p) != expect) ++bad;
    harmonic += Rational(1) / Rational(d);
  }
  return {bad == 0, std::to_string(510 - bad) + "/510 supports satisfy both identities"};
}

// 5. recovery threshold overhead for Robust and Wave Soliton
Outcome threshold_overhead() {
  ThresholdOptions o;
  o.trials = 200;
  o.seed = 5;
  bool ok = true;
  std::ostringstream why;
  for (std::size_t side : {4u, 5u}) {
    const std::size_t mn = side * side;
    const auto rsd = estimate_recovery_threshold(robust_soliton(mn, 0.1, 0.5), side, side, o);
    const auto wave = estimate_recovery_threshold(wave_soliton(mn), side, side, o);
    ok &= rsd.mean <= 1.20 * mn && wave.mean <= 1.35 * mn;
    why << "mn=" << mn << ": robust " << fmt("%.3f", rsd.mean / mn) << "x, wave "
        << fmt("%.3f", wave.mean / mn) << "x; ";
  }
  return {ok, why.str()};
}

// 6. polynomial code: threshold exactly mn, and any mn-subset decodes alike
Outcome polynomial_optimality() {
  bool ok = true;
  std::ostringstream why;
  for (std::size_t side : {2u, 3u, 4u}) {
    const std::size_t mn = side * side;
    ThresholdOptions o;
    o.trials = 100;
    o.seed = 6;
    const auto s = estimate_polynomial_threshold(side, side, o);
    const bool all_mn = s.k_histogram.size() == 1 && s.k_histogram.begin()->first == mn;
    ok &= all_mn;

    Rng rng = derive_rng(60, side);
    const auto a = generate_random_sparse(30, 4 * side, 80, ValueLaw::integer, rng);
    const auto b = generate_random_sparse(30, 3 * side, 70, ValueLaw::integer, rng);
    const auto truth = oracle::dense_product(a, b);
    BlockProducts<Rational> blocks(convert<Rational>(a), convert<Rational>(b), side, side);
    const auto code = encode_polynomial(side, side, mn + 4);
    std::vector<ExactCodedTask> tasks;
    for (const auto& t : code.tasks) {
      CostTally tally;
      tasks.push_back({t.worker_id, t.weights, evaluate_task(t.weights, blocks, tally), 0});
    }
    std::size_t identical = 0;
    const std::size_t subsets = 12;
    for (std::size_t trial = 0; trial < subsets; ++trial) {
      auto pick = tasks;
      for (std::size_t k = pick.size(); k > 1; --k) std::swap(pick[k - 1], pick[uniform_below(rng, k)]);
      pick.resize(mn);
      const auto out = decode_polynomial<Rational>(pick, side, side);
      const auto c = convert<double>(out.blocks.assemble(a.cols(), b.cols()));
      identical += oracle::equals_dense(c, truth) ? 1 : 0;
    }
    ok &= identical == subsets;
    why << "mn=" << mn << ": K=" << fmt("%.0f", s.mean) << (all_mn ? " always" : " NOT always")
        << ", " << identical << "/" << subsets << " subsets exact; ";
  }
  return {ok, why.str()};
}

// 7. coupon collector with p1 = 1
Outcome coupon_collector() {
  bool ok = true;
  std::ostringstream why;
  for (std::size_t side : {3u, 4u}) {
    const std::size_t mn = side * side;
    ThresholdOptions o;
    o.trials = 2000;
    o.seed = 7;
    const auto s = estimate_recovery_threshold(DegreeDistribution::point_mass(mn, 1), side, side, o);
    const double expect = to_double(oracle::coupon_collector_mean(mn));
    ok &= std::abs(s.mean - expect) <= 0.10 * expect;
    why << "mn=" << mn << ": mean " << fmt("%.2f", s.mean) << " vs " << fmt("%.2f", expect) << "; ";
  }
  return {ok, why.str()};
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y, double* slope) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (slope) *slope = sxy / sxx;
  return sxy * sxy / (sxx * syy);
}

// 8. decode cost grows linearly with nnz(C)
Outcome decode_scaling() {
  WorkerModel model;
  model.workers = 20;
  model.stragglers = 2;
  const auto p = wave_soliton(16);
  Rng rc = derive_rng(8, 1000);
  const auto code = resilient_sparse_code(p, 4, 4, 20, 1, rc);
  TrialOptions opts;
  opts.fixed_code = &code;
  const SchemeSpec spec{Scheme::sparse, p, 0};
  const std::size_t trials = 5;

  std::vector<double> nnz_c, ops;
  for (std::size_t nnz : {1000u, 1414u, 2000u, 2828u, 4000u}) {
    Rng ra = derive_rng(8, nnz), rb = derive_rng(8, nnz + 1);
    const auto a = generate_random_sparse(400, 400, nnz, ValueLaw::integer, ra);
    const auto b = generate_random_sparse(400, 400, nnz, ValueLaw::integer, rb);
    std::vector<double> per(trials, 0);
    parallel_for(trials, 0, [&](std::size_t t) {
      Rng rng = derive_rng(80, t);
      per[t] = static_cast<double>(run_trial(spec, a, b, 4, 4, model, rng, opts).decode_ops);
    });
    nnz_c.push_back(static_cast<double>(block_product(a, b).nnz()));
    ops.push_back(std::accumulate(per.begin(), per.end(), 0.0) / trials);
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < nnz_c.size(); ++i) {
    lx.push_back(std::log2(nnz_c[i]));
    ly.push_back(std::log2(ops[i]));
  }
  double beta = 0;
  r_squared(lx, ly, &beta);
  const double doubling = std::pow(2.0, beta);
  const double r2 = r_squared(nnz_c, ops, nullptr);
  std::ostringstream why;
  why << "doubling nnz(C) scales decode_ops by " << fmt("%.3f", doubling) << ", linear R^2 "
      << fmt("%.4f", r2) << " (nnz(C) " << fmt("%.0f", nnz_c.front()) << ".." << fmt("%.0f", nnz_c.back())
      << ")";
  return {doubling >= 1.6 && doubling <= 2.6 && r2 >= 0.9, why.str()};
}

// 9. per-worker computation: polynomial vs sparse vs uncoded
Outcome computation_overhead() {
  ExperimentConfig cfg;
  cfg.schemes = {"uncoded", "sparse", "polynomial"};
  cfg.m = cfg.n = 4;
  cfg.model.workers = 20;
  cfg.model.stragglers = 2;
  cfg.matrix = {2000, 2000, 2000, 4000, 4000, ValueLaw::integer, "", ""};  // density 1e-3
  cfg.trials = 3;
  cfg.seed = 9;
  cfg.verify = false;
  const auto out = run_experiment(cfg);
  std::map<std::string, double> fpw;
  for (const auto& s : out.summary) fpw[s.scheme] = s.fields.at("flops_per_worker").mean;
  const double sparse_ratio = fpw["sparse"] / fpw["uncoded"];
  const double poly_ratio = fpw["polynomial"] / fpw["uncoded"];
  const double separation = poly_ratio / sparse_ratio;
  const double mean = to_double(mean_degree(wave_soliton(16)));
  const double rel = sparse_ratio / mean;
  std::ostringstream why;
  why << "sparse/uncoded " << fmt("%.2f", sparse_ratio) << " (mean degree " << fmt("%.2f", mean)
      << ", ratio " << fmt("%.2f", rel) << "), polynomial/uncoded " << fmt("%.2f", poly_ratio)
      << ", separation " << fmt("%.2f", separation);
  return {separation >= 2 && rel >= 0.5 && rel <= 2, why.str()};
}

// Independent re-check of the optimizer's two constraint families.
bool recheck(const DegreeDistribution& p, const OptimizerConfig& cfg, std::string& why) {
  const std::size_t d = cfg.d;
  auto bin = [](unsigned long n, unsigned long k) {
    Integer out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return Rational(out);
  };
  Rational match(1);
  for (std::size_t s = 1; s <= d; ++s) {
    Rational p0(0);
    for (std::size_t k = 1; k <= d; ++k) {
      if (k <= d - s) p0 += p.probability(k) * bin(d - s, k) / bin(d, k);
    }
    match *= 1 - p0;
  }
  const bool matching_ok = to_double(match) >= cfg.p_m - 1e-9;
  double worst = 1e9;
  const double hi = 1 - double(cfg.b) / double(d);
  const auto probs = p.as_doubles();
  for (std::size_t i = 0; i < cfg.grid_points; ++i) {
    const double x = hi * double(i) / double(cfg.grid_points - 1);
    double op = 0;
    for (std::size_t k = 1; k <= d; ++k) op += double(k) * probs[k - 1] * std::pow(x, double(k - 1));
    const double margin = 1 - x - cfg.c0 * std::sqrt((1 - x) / double(d)) -
                          std::pow(1 - op / double(d), double(d + cfg.c));
    worst = std::min(worst, margin);
  }
  why = "matching " + fmt("%.5f", to_double(match)) + ", worst decodability margin " + fmt("%.2e", worst);
  return matching_ok && worst >= -1e-9;
}

// 10. optimizer at d = 6
Outcome optimizer_reproduction() {
  const OptimizerConfig cfg;
  const auto r = optimize_distribution(cfg);
  std::string check;
  const bool feasible = recheck(r.distribution, cfg, check);
  const double mean = to_double(r.objective);
  ThresholdOptions o;
  o.trials = 500;
  o.seed = 10;
  const auto th = estimate_recovery_threshold(r.distribution, 2, 3, o);
  std::vector<double> sweep;
  for (double pm : {0.1, 0.15, 0.2}) {
    OptimizerConfig c = cfg;
    c.p_m = pm;
    sweep.push_back(to_double(optimize_distribution(c).objective));
  }
  const bool monotone = sweep[0] <= sweep[1] + 1e-12 && sweep[1] <= sweep[2] + 1e-12;
  std::ostringstream why;
  why << (feasible ? "feasible" : "INFEASIBLE") << " (" << check << "), mean degree "
      << fmt("%.4f", mean) << ", threshold " << fmt("%.2f", th.mean) << ", sweep "
      << fmt("%.4f", sweep[0]) << " " << fmt("%.4f", sweep[1]) << " " << fmt("%.4f", sweep[2]);
  return {feasible && mean <= 2.4 && th.mean <= 9.0 && monotone, why.str()};
}

struct Criterion {
  std::function<Outcome()> run;
  double limit_seconds;
};

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, Criterion> criteria = {
      {1, {worked_example, 1}},        {2, {end_to_end, 60}},
      {3, {matching_oracle, 30}},      {4, {wave_identities, 5}},
      {5, {threshold_overhead, 300}},  {6, {polynomial_optimality, 60}},
      {7, {coupon_collector, 60}},     {8, {decode_scaling, 120}},
      {9, {computation_overhead, 120}}, {10, {optimizer_reproduction, 180}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [k, c] : criteria) selected.push_back(k);
  }
  bool all = true;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", k);
      all = false;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = it->second.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= it->second.limit_seconds;
    const bool pass = out.pass && in_time;
    all &= pass;
    std::printf("criterion %d: %s %s [%.2f s of %.0f s]\n", k, pass ? "PASS" : "FAIL",
                out.detail.c_str(), secs, it->second.limit_seconds);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
