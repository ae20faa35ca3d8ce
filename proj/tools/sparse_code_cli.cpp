// sparse_code: generate inputs, run straggler simulations, estimate recovery
// thresholds, analyze and optimize degree distributions.
//
// Exit status: 0 ok, 1 runtime failure, 2 usage or config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparse_code/analysis.hpp"
#include "sparse_code/degree_distribution.hpp"
#include "sparse_code/error.hpp"
#include "sparse_code/matrix_market.hpp"
#include "sparse_code/optimizer.hpp"
#include "sparse_code/random.hpp"
#include "sparse_code/simulation.hpp"

using namespace sparse_code;
using nlohmann::json;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

/// Config problems caught after CLI11 has finished parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// "-" or empty means stdout
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

DegreeDistribution pick_distribution(const std::string& dist, const std::string& file,
                                     std::size_t d, double c, double delta) {
  if (!file.empty()) {
    const json j = read_json_file(file);
    try {
      return distribution_from_json(j.contains("distribution") ? j["distribution"] : j);
    } catch (const Error& e) {
      throw UsageError(file + ": " + e.what());
    }
  }
  if (d == 0) throw UsageError("--d (or --mn) is required with --dist " + dist);
  if (dist == "wave") return wave_soliton(d);
  if (dist == "robust") return robust_soliton(d, c, delta);
  if (dist == "ideal") return ideal_soliton(d);
  if (dist == "coupon") return DegreeDistribution::point_mass(d, 1);
  throw UsageError("unknown distribution '" + dist + "'");
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
  std::size_t rows = 400;
  std::size_t cols = 400;
  std::size_t nnz = 0;
  double density = 0;
  std::string law = "integer";
  std::uint64_t seed = 1;
  std::string out;
};

void run_gen(const GenArgs& g) {
  std::size_t nnz = g.nnz;
  if (g.density > 0) {
    nnz = static_cast<std::size_t>(g.density * static_cast<double>(g.rows) * static_cast<double>(g.cols) + 0.5);
  }
  if (nnz == 0) throw UsageError("give --nnz or --density");
  Rng rng = derive_rng(g.seed, 0);
  SparseMatrix m;
  try {
    m = generate_random_sparse(g.rows, g.cols, nnz, parse_law(g.law), rng);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
  std::ostringstream os;
  write_matrix_market(os, m);
  write_text(g.out, os.str());
}

// ---- simulate -------------------------------------------------------------

struct SimArgs {
  std::string config;
  std::vector<std::string> schemes;
  std::size_t m = 4, n = 4, workers = 20, stragglers = 0;
  double slowdown = 8;
  std::string time_model = "deterministic";
  std::size_t rows = 400, a_cols = 400, b_cols = 400, nnz = 4000;
  std::string law = "integer";
  std::string a_file, b_file;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::string dist = "wave";
  std::string code_mode = "fresh";
  std::size_t resilience = 1;
  std::size_t extra_rows = 0;
  bool no_verify = false;
  std::size_t threads = 0;
  std::string csv, summary_csv, json_out;
};

ExperimentConfig sim_config(const SimArgs& s, const CLI::App& app) {
  json j;
  if (!s.config.empty()) j = read_json_file(s.config);
  // flags given explicitly override the file
  auto set = [&](const char* flag, const char* key, const json& value) {
    if (s.config.empty() || app.count(flag) > 0) j[key] = value;
  };
  set("--scheme", "schemes", s.schemes.empty() ? std::vector<std::string>{"sparse"} : s.schemes);
  set("--m", "m", s.m);
  set("--n", "n", s.n);
  set("--N", "N", s.workers);
  set("--stragglers", "s", s.stragglers);
  set("--slowdown", "slowdown", s.slowdown);
  set("--time-model", "time_model", s.time_model);
  set("--trials", "trials", s.trials);
  set("--seed", "seed", s.seed);
  set("--dist", "distribution", s.dist);
  set("--code-mode", "code_mode", s.code_mode);
  set("--resilience", "resilience", s.resilience);
  set("--extra-rows", "extra_rows", s.extra_rows);
  if (app.count("--no-verify") > 0) j["verify"] = false;
  if (app.count("--threads") > 0) j["threads"] = s.threads;

  const bool matrix_flags = app.count("--rows") + app.count("--a-cols") + app.count("--b-cols") +
                                app.count("--nnz") + app.count("--law") + app.count("--a") > 0;
  if (s.config.empty() || matrix_flags) {
    json mj = j.value("matrix", json::object());
    auto mset = [&](const char* flag, const char* key, const json& value) {
      if (s.config.empty() || app.count(flag) > 0) mj[key] = value;
    };
    mset("--rows", "rows", s.rows);
    mset("--a-cols", "a_cols", s.a_cols);
    mset("--b-cols", "b_cols", s.b_cols);
    mset("--nnz", "nnz_a", s.nnz);
    mset("--nnz", "nnz_b", s.nnz);
    mset("--law", "law", s.law);
    if (!s.a_file.empty()) {
      mj["a_file"] = s.a_file;
      mj["b_file"] = s.b_file;
    }
    j["matrix"] = mj;
  }
  try {
    return experiment_config_from_json(j);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
}

std::string summary_csv(const std::vector<SchemeSummary>& summary) {
  std::ostringstream os;
  os << "scheme,trials,correct,verified";
  for (const auto& f : trial_fields()) os << ',' << f << "_mean," << f << "_std";
  os << '\n';
  char buf[64];
  for (const auto& s : summary) {
    os << s.scheme << ',' << s.trials << ',' << s.correct << ',' << s.verified;
    for (const auto& f : trial_fields()) {
      const auto it = s.fields.find(f);
      const FieldSummary v = it == s.fields.end() ? FieldSummary{} : it->second;
      std::snprintf(buf, sizeof buf, ",%.10g,%.10g", v.mean, v.stddev);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

void run_simulate(const SimArgs& s, const CLI::App& app) {
  const ExperimentConfig cfg = sim_config(s, app);
  const ExperimentOutput out = run_experiment(cfg);
  if (!s.csv.empty()) write_text(s.csv, trials_csv(out.trials));
  if (!s.summary_csv.empty()) write_text(s.summary_csv, summary_csv(out.summary));
  write_text(s.json_out, dump(to_json(out, cfg)));
}

// ---- threshold ------------------------------------------------------------

struct ThresholdArgs {
  std::string dist = "wave";
  std::string dist_file;
  std::size_t mn = 0, m = 0, n = 0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  double robust_c = 0.1, robust_delta = 0.5;
  std::size_t threads = 0;
  std::string csv, json_out;
};

void run_threshold(const ThresholdArgs& t) {
  std::size_t m = t.m, n = t.n;
  if (t.mn > 0) {
    if (m * n != 0 && m * n != t.mn) throw UsageError("--mn disagrees with --m * --n");
    if (m * n == 0) m = t.mn, n = 1;
  }
  if (m == 0 || n == 0) throw UsageError("give --mn or both --m and --n");
  if (t.trials == 0) throw UsageError("--trials must be positive");

  ThresholdOptions opts;
  opts.trials = t.trials;
  opts.seed = t.seed;
  opts.threads = t.threads;
  ThresholdSummary summary;
  if (t.dist == "polynomial" && t.dist_file.empty()) {
    summary = estimate_polynomial_threshold(m, n, opts);
  } else {
    const auto p = pick_distribution(t.dist, t.dist_file, m * n, t.robust_c, t.robust_delta);
    if (p.support_size() != m * n) throw UsageError("distribution support must equal m*n");
    summary = estimate_recovery_threshold(p, m, n, opts);
    if (!t.dist_file.empty()) summary.code = "file";
  }
  if (!t.csv.empty()) write_text(t.csv, histogram_csv(summary.k_histogram));
  write_text(t.json_out, dump(to_json(summary)));
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string dist = "wave";
  std::string dist_file;
  std::size_t d = 0;
  double robust_c = 0.1, robust_delta = 0.5;
  bool matching = false;
  bool evolution = false;
  std::size_t K = 0;  // 0 disables the decodability check
  std::string form = "peeling";
  std::size_t b = 2, grid = 200, c = 2;
  double c0 = 0;
  std::string json_out;
};

void run_analyze(const AnalyzeArgs& a) {
  const auto p = pick_distribution(a.dist, a.dist_file, a.d, a.robust_c, a.robust_delta);
  json j = {{"schema", "sparse-code.analysis.v1"},
            {"distribution", to_json(p)},
            {"mean_degree", to_fraction_string(mean_degree(p))},
            {"mean_degree_decimal", to_double(mean_degree(p))}};
  const bool any = a.matching || a.evolution || a.K > 0;
  if (a.matching || !any) {
    const Rational q = perfect_matching_probability(p);
    j["matching"] = {{"exact", to_fraction_string(q)}, {"decimal", to_double(q)}};
  }
  if (a.evolution) {
    const auto ev = degree_evolution(p);
    json rows = json::array();
    for (std::size_t s = 1; s <= ev.d; ++s) {
      json row = json::array();
      for (const auto& v : ev.row(s)) row.push_back(to_fraction_string(v));
      rows.push_back(row);
    }
    j["degree_evolution"] = rows;
  }
  if (a.K > 0) {
    DecodabilityOptions opts;
    if (a.form == "peeling") opts.form = DecodabilityForm::peeling;
    else if (a.form == "strengthened") opts.form = DecodabilityForm::strengthened;
    else throw UsageError("--form must be peeling or strengthened");
    opts.b = a.b;
    opts.grid_points = a.grid;
    opts.c = a.c;
    opts.c0 = a.c0;
    try {
      j["decodability"] = to_json(decodability_check(p, a.K, opts));
    } catch (const InvalidParameter& e) {
      throw UsageError(e.what());
    }
  }
  write_text(a.json_out, dump(j));
}

// ---- optimize -------------------------------------------------------------

struct OptimizeArgs {
  std::string config;
  std::size_t d = 6;
  std::vector<double> p_m;
  std::size_t c = 2, b = 2, grid = 200;
  double c0 = 0.1;
  std::string csv, json_out;
};

void run_optimize(const OptimizeArgs& o, const CLI::App& app) {
  json j;
  if (!o.config.empty()) j = read_json_file(o.config);
  auto set = [&](const char* flag, const char* key, const json& value) {
    if (o.config.empty() || app.count(flag) > 0) j[key] = value;
  };
  set("--d", "d", o.d);
  set("--c", "c", o.c);
  set("--c0", "c0", o.c0);
  set("--b", "b", o.b);
  set("--grid", "grid_points", o.grid);

  std::vector<OptimizerConfig> configs;
  try {
    const OptimizerConfig base = optimizer_config_from_json(j);
    if (o.p_m.empty()) {
      configs.push_back(base);
    }
    for (double v : o.p_m) {
      OptimizerConfig cfg = base;
      cfg.p_m = v;
      cfg.validate();
      configs.push_back(cfg);
    }
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }

  json rows = json::array();
  std::ostringstream csv;
  csv << "d,p_m,status,mean_degree,matching,min_margin,distribution\n";
  char buf[128];
  for (const auto& cfg : configs) {
    try {
      const auto r = optimize_distribution(cfg);
      rows.push_back(to_json(r));
      std::snprintf(buf, sizeof buf, "%zu,%.10g,feasible,%.10g,%.10g,%.10g,", cfg.d, cfg.p_m,
                    to_double(r.objective), r.report.matching, r.report.decodability.min_margin);
      csv << buf;
      const auto probs = r.distribution.as_doubles();
      for (std::size_t k = 0; k < probs.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.6g", k ? " " : "", probs[k]);
        csv << buf;
      }
      csv << '\n';
    } catch (const Infeasible& e) {
      rows.push_back({{"schema", "sparse-code.optimizer.v1"},
                      {"config", to_json(cfg)},
                      {"status", "infeasible"},
                      {"family", e.family()},
                      {"message", e.what()}});
      std::snprintf(buf, sizeof buf, "%zu,%.10g,infeasible-%s,,,,\n", cfg.d, cfg.p_m,
                    e.family().c_str());
      csv << buf;
    }
  }
  if (!o.csv.empty()) write_text(o.csv, csv.str());
  const json out = rows.size() == 1 ? rows[0]
                                    : json{{"schema", "sparse-code.optimizer-sweep.v1"}, {"rows", rows}};
  write_text(o.json_out, dump(out));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded sparse matrix multiplication: simulation, analysis and optimization"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "write a random sparse matrix in Matrix Market format");
  g->add_option("--rows", gen.rows)->check(CLI::PositiveNumber);
  g->add_option("--cols", gen.cols)->check(CLI::PositiveNumber);
  g->add_option("--nnz", gen.nnz, "number of nonzeros");
  g->add_option("--density", gen.density, "alternative to --nnz")->check(CLI::Range(0.0, 1.0));
  g->add_option("--law", gen.law)->check(CLI::IsMember({"integer", "bernoulli"}));
  g->add_option("--seed", gen.seed);
  g->add_option("-o,--out", gen.out, "output path, stdout by default");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "master/worker straggler simulation");
  s->add_option("--config", sim.config, "experiment config JSON; flags override it");
  s->add_option("--scheme", sim.schemes, "sparse, uncoded, polynomial (repeatable)")
      ->delimiter(',')
      ->check(CLI::IsMember({"sparse", "uncoded", "polynomial"}));
  s->add_option("--m", sim.m);
  s->add_option("--n", sim.n);
  s->add_option("--N", sim.workers, "workers");
  s->add_option("--stragglers", sim.stragglers);
  s->add_option("--slowdown", sim.slowdown);
  s->add_option("--time-model", sim.time_model)
      ->check(CLI::IsMember({"deterministic", "shifted_exponential"}));
  s->add_option("--rows", sim.rows);
  s->add_option("--a-cols", sim.a_cols);
  s->add_option("--b-cols", sim.b_cols);
  s->add_option("--nnz", sim.nnz, "nonzeros in each of A and B");
  s->add_option("--law", sim.law)->check(CLI::IsMember({"integer", "bernoulli"}));
  auto* a_opt = s->add_option("--a", sim.a_file, "Matrix Market file for A");
  auto* b_opt = s->add_option("--b", sim.b_file, "Matrix Market file for B");
  a_opt->needs(b_opt);
  b_opt->needs(a_opt);
  s->add_option("--trials", sim.trials);
  s->add_option("--seed", sim.seed);
  s->add_option("--dist", sim.dist, "wave, robust, or a distribution JSON file");
  s->add_option("--code-mode", sim.code_mode)->check(CLI::IsMember({"fresh", "fixed"}));
  s->add_option("--resilience", sim.resilience);
  s->add_option("--extra-rows", sim.extra_rows);
  s->add_flag("--no-verify", sim.no_verify);
  s->add_option("--threads", sim.threads);
  s->add_option("--csv", sim.csv, "per-trial CSV");
  s->add_option("--summary-csv", sim.summary_csv, "per-scheme CSV");
  s->add_option("--json", sim.json_out, "summary JSON, stdout by default");

  ThresholdArgs th;
  auto* t = app.add_subcommand("threshold", "Monte Carlo recovery threshold");
  t->add_option("--dist", th.dist, "wave, robust, ideal, coupon, polynomial")
      ->check(CLI::IsMember({"wave", "robust", "ideal", "coupon", "polynomial"}));
  t->add_option("--dist-file", th.dist_file);
  t->add_option("--mn", th.mn);
  t->add_option("--m", th.m);
  t->add_option("--n", th.n);
  t->add_option("--trials", th.trials);
  t->add_option("--seed", th.seed);
  t->add_option("--robust-c", th.robust_c);
  t->add_option("--robust-delta", th.robust_delta);
  t->add_option("--threads", th.threads);
  t->add_option("--csv", th.csv, "histogram of the minimal K");
  t->add_option("--json", th.json_out, "summary JSON, stdout by default");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "matching probability and decodability of a distribution");
  a->add_option("--dist", an.dist)->check(CLI::IsMember({"wave", "robust", "ideal", "coupon"}));
  a->add_option("--dist-file", an.dist_file, "JSON {\"d\":..,\"probs\":[..]}");
  a->add_option("--d", an.d, "support size for a named distribution");
  a->add_option("--robust-c", an.robust_c);
  a->add_option("--robust-delta", an.robust_delta);
  a->add_flag("--matching", an.matching, "exact perfect-matching probability");
  a->add_flag("--evolution", an.evolution, "degree evolution table");
  a->add_option("--K", an.K, "tasks for the decodability check");
  a->add_option("--form", an.form)->check(CLI::IsMember({"peeling", "strengthened"}));
  a->add_option("--b", an.b);
  a->add_option("--grid", an.grid);
  a->add_option("--c", an.c);
  a->add_option("--c0", an.c0);
  a->add_option("--json", an.json_out, "stdout by default");

  OptimizeArgs op;
  auto* o = app.add_subcommand("optimize", "minimize the mean degree");
  o->add_option("--config", op.config, "optimizer config JSON; flags override it");
  o->add_option("--d", op.d);
  o->add_option("--pm", op.p_m, "matching floor; repeat or comma-separate for a sweep")->delimiter(',');
  o->add_option("--c", op.c);
  o->add_option("--c0", op.c0);
  o->add_option("--b", op.b);
  o->add_option("--grid", op.grid);
  o->add_option("--csv", op.csv, "one row per p_m");
  o->add_option("--json", op.json_out, "stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*g) run_gen(gen);
    else if (*s) run_simulate(sim, *s);
    else if (*t) run_threshold(th);
    else if (*a) run_analyze(an);
    else if (*o) run_optimize(op, *o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
