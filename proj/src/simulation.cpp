#include "sparse_code/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "sparse_code/decoder.hpp"
#include "sparse_code/error.hpp"
#include "sparse_code/matrix_market.hpp"
#include "sparse_code/parallel.hpp"

namespace sparse_code {

std::string law_name(ValueLaw law) { return law == ValueLaw::bernoulli ? "bernoulli" : "integer"; }

ValueLaw parse_law(const std::string& name) {
  if (name == "bernoulli") return ValueLaw::bernoulli;
  if (name == "integer") return ValueLaw::integer;
  throw InvalidParameter("unknown value law '" + name + "'");
}

SparseMatrix generate_random_sparse(std::size_t rows, std::size_t cols, std::size_t nnz_target,
                                    ValueLaw law, Rng& rng) {
  const std::uint64_t total = static_cast<std::uint64_t>(rows) * cols;
  if (nnz_target > total) {
    throw InvalidParameter("nnz_target " + std::to_string(nnz_target) + " exceeds " +
                           std::to_string(total) + " positions");
  }
  // Floyd: one draw per chosen position, no rejection loop
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(nnz_target * 2);
  std::vector<std::uint64_t> order;
  order.reserve(nnz_target);
  for (std::uint64_t j = total - nnz_target; j < total; ++j) {
    const std::uint64_t t = uniform_below(rng, j + 1);
    const std::uint64_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    order.push_back(pick);
  }
  std::sort(order.begin(), order.end());
  std::vector<Triplet<double>> entries;
  entries.reserve(nnz_target);
  for (const auto pos : order) {
    double value = 1.0;
    if (law == ValueLaw::integer) {
      const auto draw = static_cast<int>(uniform_below(rng, 18));
      value = draw < 9 ? -(draw + 1) : draw - 8;
    }
    entries.push_back({static_cast<std::size_t>(pos / cols), static_cast<std::size_t>(pos % cols), value});
  }
  return from_triplets(rows, cols, std::move(entries));
}

std::string time_model_name(TimeModel model) {
  return model == TimeModel::deterministic ? "deterministic" : "shifted_exponential";
}

TimeModel parse_time_model(const std::string& name) {
  if (name == "deterministic") return TimeModel::deterministic;
  if (name == "shifted_exponential") return TimeModel::shifted_exponential;
  throw InvalidParameter("unknown time model '" + name + "'");
}

void WorkerModel::validate() const {
  if (workers == 0) throw InvalidParameter("need at least one worker");
  if (stragglers > workers) throw InvalidParameter("more stragglers than workers");
  if (!(slowdown >= 1)) throw InvalidParameter("slowdown must be at least 1");
  if (!(flop_rate > 0) || !(bandwidth > 0)) throw InvalidParameter("rates must be positive");
  if (!(entry_bytes >= 0)) throw InvalidParameter("entry_bytes must be nonnegative");
  if (time_model == TimeModel::shifted_exponential && (!(rate > 0) || !(shift >= 0))) {
    throw InvalidParameter("shifted exponential needs rate > 0 and shift >= 0");
  }
}

namespace {

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_below(rng, population - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool full_rank_without(const std::vector<WeightRow>& rows, const std::vector<bool>& dropped,
                       std::size_t width) {
  EchelonState state(width);
  for (std::size_t k = 0; k < rows.size() && !state.full_rank(); ++k) {
    if (!dropped[k]) state.insert(rows[k]);
  }
  return state.full_rank();
}

/// Every way to drop `r` of `count` rows, in lexicographic order.
template <class Visit>
bool all_drops(std::size_t count, std::size_t r, Visit&& visit) {
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<bool> dropped(count, false);
  while (true) {
    std::fill(dropped.begin(), dropped.end(), false);
    for (const auto i : idx) dropped[i] = true;
    if (!visit(dropped)) return false;
    std::size_t pos = r;
    while (pos > 0 && idx[pos - 1] == count - r + pos - 1) --pos;
    if (pos == 0) return true;
    ++idx[pos - 1];
    for (std::size_t q = pos; q < r; ++q) idx[q] = idx[q - 1] + 1;
  }
}

struct WorkerRun {
  std::uint64_t flops = 0;
  std::uint64_t combine = 0;
  std::uint64_t operand_nnz = 0;
  std::uint64_t result_nnz = 0;
  double time = 0;
};

/// Completion times and consumption order (ties to the lower worker id).
std::vector<std::size_t> schedule(std::vector<WorkerRun>& runs, const WorkerModel& model,
                                  const std::vector<std::size_t>& stragglers, Rng& rng) {
  std::vector<bool> slow(runs.size(), false);
  for (const auto s : stragglers) slow[s] = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    auto& w = runs[k];
    const double bytes = model.entry_bytes * static_cast<double>(w.operand_nnz + w.result_nnz);
    double t = static_cast<double>(w.flops + w.combine) / model.flop_rate + bytes / model.bandwidth;
    if (model.time_model == TimeModel::shifted_exponential) {
      const double e = -std::log1p(-uniform_unit(rng)) / model.rate;
      t *= model.shift + e;
    }
    w.time = slow[k] ? t * model.slowdown : t;
  }
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return runs[x].time < runs[y].time; });
  return order;
}

void fill_costs(TrialResult& r, const std::vector<WorkerRun>& runs, const WorkerModel& model,
                const std::vector<std::size_t>& consumed) {
  for (const auto& w : runs) {
    r.encode_nnz_in += w.operand_nnz;
    r.compute_flops += w.flops;
    r.combine_ops += w.combine;
  }
  r.flops_per_worker = static_cast<double>(r.compute_flops) / static_cast<double>(runs.size());
  r.bytes_in = static_cast<std::uint64_t>(model.entry_bytes * static_cast<double>(r.encode_nnz_in));
  std::uint64_t shipped = 0;
  for (const auto k : consumed) shipped += runs[k].result_nnz;
  r.bytes_out = static_cast<std::uint64_t>(model.entry_bytes * static_cast<double>(shipped));
  r.K_used = consumed.size();
  r.wall_model_time = consumed.empty() ? 0 : runs[consumed.back()].time;
}

}  // namespace

std::vector<WeightRow> resilient_sparse_code(const DegreeDistribution& p, std::size_t m,
                                             std::size_t n, std::size_t workers,
                                             std::size_t resilience, Rng& rng) {
  const std::size_t mn = m * n;
  if (workers < mn) throw InsufficientWorkers("a sparse code needs at least m*n workers");
  resilience = std::min(resilience, workers - mn);
  const WeightSet weights = WeightSet::for_grid(m, n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<WeightRow> rows;
    rows.reserve(workers);
    for (std::size_t k = 0; k < workers; ++k) rows.push_back(sparse_code_row(p, weights, rng));
    const bool ok = all_drops(workers, resilience, [&](const std::vector<bool>& dropped) {
      return full_rank_without(rows, dropped, mn);
    });
    if (ok) return rows;
  }
  throw InsufficientWorkers("no code tolerating " + std::to_string(resilience) +
                            " missing results found in 1000 draws");
}

TrialResult run_trial(const SchemeSpec& spec, const SparseMatrix& a, const SparseMatrix& b,
                      std::size_t m, std::size_t n, const WorkerModel& model, Rng& rng,
                      const TrialOptions& options) {
  model.validate();
  if (a.rows() != b.rows()) throw ShapeError("A and B must share their row dimension");
  const std::size_t mn = m * n;
  const std::size_t N = model.workers;
  if (N < mn) throw InsufficientWorkers("need at least m*n = " + std::to_string(mn) + " workers");

  TrialResult r;
  r.scheme = scheme_name(spec.scheme);
  r.straggler_ids = sample_indices(N, model.stragglers, rng);
  std::vector<WorkerRun> runs(N);
  std::vector<std::size_t> consumed;

  if (spec.scheme == Scheme::polynomial) {
    const auto a_parts = split_columns(convert<Rational>(a), m);
    const auto b_parts = split_columns(convert<Rational>(b), n);
    const auto code = encode_polynomial(m, n, N);
    std::vector<ExactCodedTask> tasks;
    for (const auto& t : code.tasks) tasks.push_back({t.worker_id, t.weights, std::nullopt, 0});
    for (std::size_t k = 0; k < N; ++k) {
      CostTally encode;
      const auto [ac, bc] = polynomial_operands<Rational>(a_parts, b_parts, code.points[k], encode);
      CostTally work;
      tasks[k].result = block_product(ac, bc, work);
      runs[k] = {work.multiply_adds, encode.entry_updates, ac.nnz() + bc.nnz(), tasks[k].result->nnz(), 0};
    }
    const auto order = schedule(runs, model, r.straggler_ids, rng);
    consumed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mn));
    std::vector<ExactCodedTask> collected;
    for (const auto k : consumed) collected.push_back(tasks[k]);
    const auto decoded = decode_polynomial<Rational>(collected, m, n);
    r.decode_ops = decoded.block_op_count;
    r.product = convert<double>(decoded.blocks.assemble(a.cols(), b.cols()));
  } else {
    BlockProducts<double> products(a, b, m, n);
    std::vector<CodedTask> tasks;
    if (spec.scheme == Scheme::uncoded) {
      tasks = assign_uncoded(m, n, N);
    } else {
      const DegreeDistribution p = spec.distribution ? *spec.distribution : wave_soliton(mn);
      if (p.support_size() != mn) throw DimensionMismatch("distribution support must equal m*n");
      const auto rows = options.fixed_code
                            ? *options.fixed_code
                            : resilient_sparse_code(p, m, n, N, options.resilience, rng);
      if (rows.size() != N) throw DimensionMismatch("fixed code must have one row per worker");
      for (std::size_t k = 0; k < N; ++k) tasks.push_back({k, rows[k], std::nullopt, 0});
    }
    for (std::size_t k = 0; k < N; ++k) {
      CostTally work;
      tasks[k].result = evaluate_task(tasks[k].weights, products, work);
      runs[k] = {work.multiply_adds, work.entry_updates, products.operand_nnz(tasks[k].weights),
                 tasks[k].result->nnz(), 0};
    }
    const auto order = schedule(runs, model, r.straggler_ids, rng);
    for (std::size_t k = 0; k < N; ++k) tasks[k].completion_time = runs[k].time;

    if (spec.scheme == Scheme::uncoded) {
      BlockGrid grid(m, n, products.block_rows(), products.block_cols());
      std::size_t covered = 0;
      for (const auto k : order) {
        if (covered == mn) break;
        consumed.push_back(k);
        const std::size_t column = tasks[k].weights.front().column;
        if (!grid.has(column)) {
          grid.set(column, *tasks[k].result);
          ++covered;
        }
      }
      if (covered < mn) throw RankDeficient("uncoded results do not cover every block");
      r.product = grid.assemble(a.cols(), b.cols());
    } else {
      EchelonState state(mn);
      std::size_t extra = 0;
      for (const auto k : order) {
        if (state.full_rank() && extra == spec.extra_rows) break;
        if (state.full_rank()) ++extra;
        consumed.push_back(k);
        state.insert(tasks[k].weights);
      }
      if (!state.full_rank()) {
        throw RankDeficient("all " + std::to_string(N) + " results leave the code rank-deficient");
      }
      std::vector<CodedTask> collected;
      for (const auto k : consumed) collected.push_back(tasks[k]);
      const auto decoded = hybrid_decode<double>(collected, m, n);
      r.decode_ops = decoded.stats.block_op_count;
      r.rooting_steps = decoded.stats.rooted;
      r.peeled = decoded.stats.peeled;
      r.product = decoded.blocks.assemble(a.cols(), b.cols());
    }
  }

  fill_costs(r, runs, model, consumed);
  if (options.reference) {
    r.verified = true;
    r.correct = r.product == *options.reference;
  }
  return r;
}

std::vector<std::string> trial_fields() {
  return {"K_used",     "rooting_steps", "peeled",    "encode_nnz_in", "compute_flops",
          "flops_per_worker", "combine_ops", "bytes_in", "bytes_out",    "decode_ops",
          "wall_model_time"};
}

namespace {

std::vector<double> field_values(const TrialResult& t) {
  return {static_cast<double>(t.K_used),        static_cast<double>(t.rooting_steps),
          static_cast<double>(t.peeled),        static_cast<double>(t.encode_nnz_in),
          static_cast<double>(t.compute_flops), t.flops_per_worker,
          static_cast<double>(t.combine_ops),   static_cast<double>(t.bytes_in),
          static_cast<double>(t.bytes_out),     static_cast<double>(t.decode_ops),
          t.wall_model_time};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<SchemeSummary> aggregate(const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw InvalidParameter("nothing to aggregate");
  const auto names = trial_fields();
  std::vector<SchemeSummary> out;
  std::vector<std::vector<std::vector<double>>> values;  // scheme, field, trial
  for (const auto& t : trials) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SchemeSummary& s) { return s.scheme == t.scheme; });
    if (it == out.end()) {
      out.push_back({t.scheme, 0, 0, 0, {}});
      values.emplace_back(names.size());
      it = out.end() - 1;
    }
    auto& cols = values[static_cast<std::size_t>(it - out.begin())];
    ++it->trials;
    it->verified += t.verified ? 1 : 0;
    it->correct += t.correct ? 1 : 0;
    const auto v = field_values(t);
    for (std::size_t f = 0; f < names.size(); ++f) cols[f].push_back(v[f]);
  }
  for (std::size_t s = 0; s < out.size(); ++s) {
    for (std::size_t f = 0; f < names.size(); ++f) {
      const auto& xs = values[s][f];
      const double count = static_cast<double>(xs.size());
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
      double sq = 0;
      for (const double x : xs) sq += (x - mean) * (x - mean);
      out[s].fields[names[f]] = {mean, xs.size() > 1 ? std::sqrt(sq / (count - 1)) : 0.0};
    }
  }
  return out;
}

std::string trials_csv(const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out << "trial,scheme";
  for (const auto& f : trial_fields()) out << ',' << f;
  out << ",stragglers,verified,correct\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.scheme;
    for (const double v : field_values(t)) out << ',' << fmt(v);
    out << ',';
    for (std::size_t i = 0; i < t.straggler_ids.size(); ++i) out << (i ? ";" : "") << t.straggler_ids[i];
    out << ',' << (t.verified ? 1 : 0) << ',' << (t.correct ? 1 : 0) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const SchemeSummary& s) {
  nlohmann::json fields = nlohmann::json::object();
  for (const auto& name : trial_fields()) {
    const auto& f = s.fields.at(name);
    fields[name] = {{"mean", f.mean}, {"std", f.stddev}};
  }
  return {{"scheme", s.scheme},
          {"trials", s.trials},
          {"verified", s.verified},
          {"correct", s.correct},
          {"fields", fields}};
}

void ExperimentConfig::validate() const {
  if (schemes.empty()) throw InvalidParameter("at least one scheme is required");
  for (const auto& s : schemes) parse_scheme(s);
  if (m < 1 || n < 1) throw InvalidParameter("m and n must be positive");
  model.validate();
  if (model.workers < m * n) throw InvalidParameter("N must be at least m*n");
  if (trials < 1) throw InvalidParameter("trials must be positive");
  if (matrix.a_file.empty() != matrix.b_file.empty()) {
    throw InvalidParameter("give both matrix files or neither");
  }
  if (matrix.a_file.empty()) {
    if (matrix.rows == 0 || matrix.a_cols < m || matrix.b_cols < n) {
      throw InvalidParameter("matrix shape too small for the block grid");
    }
  }
  if (code_mode == CodeMode::fixed && resilience > model.workers - m * n) {
    throw InvalidParameter("resilience exceeds N - m*n");
  }
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidParameter(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InvalidParameter("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidParameter(std::string("wrong type for '") + key + "'");
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"schema", "schemes", "m", "n", "N", "s", "slowdown", "time_model", "flop_rate",
              "bandwidth", "entry_bytes", "shift", "rate", "matrix", "trials", "seed",
              "distribution", "robust_c", "robust_delta", "code_mode", "resilience", "extra_rows",
              "verify", "threads"},
             "experiment config");
  ExperimentConfig cfg;
  if (j.contains("schemes") && j["schemes"].is_string()) {
    cfg.schemes = {j["schemes"].get<std::string>()};
  } else {
    read(j, "schemes", cfg.schemes);
  }
  read(j, "m", cfg.m);
  read(j, "n", cfg.n);
  read(j, "N", cfg.model.workers);
  read(j, "s", cfg.model.stragglers);
  read(j, "slowdown", cfg.model.slowdown);
  std::string text = time_model_name(cfg.model.time_model);
  read(j, "time_model", text);
  cfg.model.time_model = parse_time_model(text);
  read(j, "flop_rate", cfg.model.flop_rate);
  read(j, "bandwidth", cfg.model.bandwidth);
  read(j, "entry_bytes", cfg.model.entry_bytes);
  read(j, "shift", cfg.model.shift);
  read(j, "rate", cfg.model.rate);
  if (j.contains("matrix")) {
    const auto& mj = j["matrix"];
    check_keys(mj, {"rows", "a_cols", "b_cols", "nnz_a", "nnz_b", "law", "a_file", "b_file"},
               "matrix");
    read(mj, "rows", cfg.matrix.rows);
    read(mj, "a_cols", cfg.matrix.a_cols);
    read(mj, "b_cols", cfg.matrix.b_cols);
    read(mj, "nnz_a", cfg.matrix.nnz_a);
    read(mj, "nnz_b", cfg.matrix.nnz_b);
    text = law_name(cfg.matrix.law);
    read(mj, "law", text);
    cfg.matrix.law = parse_law(text);
    read(mj, "a_file", cfg.matrix.a_file);
    read(mj, "b_file", cfg.matrix.b_file);
  }
  read(j, "trials", cfg.trials);
  read(j, "seed", cfg.seed);
  read(j, "distribution", cfg.distribution);
  read(j, "robust_c", cfg.robust_c);
  read(j, "robust_delta", cfg.robust_delta);
  text = cfg.code_mode == CodeMode::fresh ? "fresh" : "fixed";
  read(j, "code_mode", text);
  if (text != "fresh" && text != "fixed") throw InvalidParameter("code_mode must be fresh or fixed");
  cfg.code_mode = text == "fresh" ? CodeMode::fresh : CodeMode::fixed;
  read(j, "resilience", cfg.resilience);
  read(j, "extra_rows", cfg.extra_rows);
  read(j, "verify", cfg.verify);
  read(j, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json matrix = {{"rows", cfg.matrix.rows},   {"a_cols", cfg.matrix.a_cols},
                           {"b_cols", cfg.matrix.b_cols}, {"nnz_a", cfg.matrix.nnz_a},
                           {"nnz_b", cfg.matrix.nnz_b},  {"law", law_name(cfg.matrix.law)}};
  if (!cfg.matrix.a_file.empty()) {
    matrix["a_file"] = cfg.matrix.a_file;
    matrix["b_file"] = cfg.matrix.b_file;
  }
  return {{"schema", "sparse-code.experiment-config.v1"},
          {"schemes", cfg.schemes},
          {"m", cfg.m},
          {"n", cfg.n},
          {"N", cfg.model.workers},
          {"s", cfg.model.stragglers},
          {"slowdown", cfg.model.slowdown},
          {"time_model", time_model_name(cfg.model.time_model)},
          {"flop_rate", cfg.model.flop_rate},
          {"bandwidth", cfg.model.bandwidth},
          {"entry_bytes", cfg.model.entry_bytes},
          {"shift", cfg.model.shift},
          {"rate", cfg.model.rate},
          {"matrix", matrix},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"distribution", cfg.distribution},
          {"robust_c", cfg.robust_c},
          {"robust_delta", cfg.robust_delta},
          {"code_mode", cfg.code_mode == CodeMode::fresh ? "fresh" : "fixed"},
          {"resilience", cfg.resilience},
          {"extra_rows", cfg.extra_rows},
          {"verify", cfg.verify}};
}

namespace {

constexpr std::uint64_t kMatrixStream = 1ULL << 40;
constexpr std::uint64_t kCodeStream = 1ULL << 41;

DegreeDistribution experiment_distribution(const ExperimentConfig& cfg) {
  const std::size_t mn = cfg.m * cfg.n;
  if (cfg.distribution == "wave") return wave_soliton(mn);
  if (cfg.distribution == "robust") return robust_soliton(mn, cfg.robust_c, cfg.robust_delta);
  std::ifstream in(cfg.distribution);
  if (!in) throw InvalidParameter("cannot open distribution file '" + cfg.distribution + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter("distribution file: " + std::string(e.what()));
  }
  auto p = distribution_from_json(j.contains("distribution") ? j["distribution"] : j);
  if (p.support_size() != mn) throw DimensionMismatch("distribution support must equal m*n");
  return p;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  SparseMatrix a;
  SparseMatrix b;
  if (!cfg.matrix.a_file.empty()) {
    a = load_matrix_market(cfg.matrix.a_file);
    b = load_matrix_market(cfg.matrix.b_file);
  } else {
    Rng ra = derive_rng(cfg.seed, kMatrixStream);
    Rng rb = derive_rng(cfg.seed, kMatrixStream + 1);
    a = generate_random_sparse(cfg.matrix.rows, cfg.matrix.a_cols, cfg.matrix.nnz_a, cfg.matrix.law, ra);
    b = generate_random_sparse(cfg.matrix.rows, cfg.matrix.b_cols, cfg.matrix.nnz_b, cfg.matrix.law, rb);
  }
  if (a.rows() != b.rows()) throw ShapeError("A and B must share their row dimension");
  if (a.cols() < cfg.m || b.cols() < cfg.n) throw InvalidPartition("more parts than columns");

  std::vector<SchemeSpec> specs;
  for (const auto& name : cfg.schemes) {
    SchemeSpec spec;
    spec.scheme = parse_scheme(name);
    if (spec.scheme == Scheme::sparse) spec.distribution = experiment_distribution(cfg);
    spec.extra_rows = cfg.extra_rows;
    specs.push_back(std::move(spec));
  }

  std::optional<std::vector<WeightRow>> fixed;
  if (cfg.code_mode == CodeMode::fixed) {
    for (const auto& spec : specs) {
      if (spec.scheme != Scheme::sparse) continue;
      Rng rc = derive_rng(cfg.seed, kCodeStream);
      fixed = resilient_sparse_code(*spec.distribution, cfg.m, cfg.n, cfg.model.workers,
                                    cfg.resilience, rc);
    }
  }
  std::optional<SparseMatrix> reference;
  if (cfg.verify) reference = block_product(a, b);

  TrialOptions options;
  options.resilience = cfg.resilience;
  options.fixed_code = fixed ? &*fixed : nullptr;
  options.reference = reference ? &*reference : nullptr;

  ExperimentOutput out;
  out.trials.resize(cfg.trials * specs.size());
  parallel_for(out.trials.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t t = i / specs.size();
    Rng rng = derive_rng(cfg.seed, t);  // same stragglers for every scheme of trial t
    auto r = run_trial(specs[i % specs.size()], a, b, cfg.m, cfg.n, cfg.model, rng, options);
    r.trial = t;
    r.product = SparseMatrix();
    out.trials[i] = std::move(r);
  });
  out.summary = aggregate(out.trials);
  return out;
}

nlohmann::json to_json(const ExperimentOutput& output, const ExperimentConfig& cfg) {
  auto schemes = nlohmann::json::array();
  for (const auto& s : output.summary) schemes.push_back(to_json(s));
  return {{"schema", "sparse-code.simulation.v1"}, {"config", to_json(cfg)}, {"summary", schemes}};
}

}  // namespace sparse_code
