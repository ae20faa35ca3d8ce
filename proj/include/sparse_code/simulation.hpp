#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparse_code/degree_distribution.hpp"
#include "sparse_code/encoder.hpp"
#include "sparse_code/random.hpp"
#include "sparse_code/sparse_matrix.hpp"

namespace sparse_code {

enum class ValueLaw { bernoulli, integer };

std::string law_name(ValueLaw law);
ValueLaw parse_law(const std::string& name);

/// nnz_target distinct uniform positions (Floyd sampling); values are 1 for
/// bernoulli, uniform on {-9..-1, 1..9} for integer. Throws InvalidParameter
/// when nnz_target exceeds rows*cols.
SparseMatrix generate_random_sparse(std::size_t rows, std::size_t cols, std::size_t nnz_target,
                                    ValueLaw law, Rng& rng);

enum class TimeModel { deterministic, shifted_exponential };

std::string time_model_name(TimeModel model);
TimeModel parse_time_model(const std::string& name);

/// Virtual-clock worker model. A task's base time is
/// flops / flop_rate + bytes / bandwidth; the shifted-exponential model scales
/// it by (shift + Exp(rate)). Stragglers multiply their time by `slowdown`.
struct WorkerModel {
  std::size_t workers = 20;
  std::size_t stragglers = 0;
  double slowdown = 8;
  TimeModel time_model = TimeModel::deterministic;
  double flop_rate = 1e9;
  double bandwidth = 1e9;   // bytes per second
  double entry_bytes = 16;  // value plus coordinates
  double shift = 1;
  double rate = 1;

  void validate() const;
};

struct SchemeSpec {
  Scheme scheme = Scheme::sparse;
  std::optional<DegreeDistribution> distribution;  // sparse only; default wave_soliton(mn)
  std::size_t extra_rows = 0;  // results consumed past the first full-rank prefix
};

struct TrialOptions {
  /// Sparse codes are redrawn until every set of N - resilience rows has
  /// full rank.
  std::size_t resilience = 1;
  /// Replay this code instead of drawing one (sparse only).
  const std::vector<WeightRow>* fixed_code = nullptr;
  /// Verify the decoded product against this matrix when set.
  const SparseMatrix* reference = nullptr;
};

struct TrialResult {
  std::string scheme;
  std::size_t trial = 0;
  std::size_t K_used = 0;
  std::size_t rooting_steps = 0;
  std::size_t peeled = 0;
  std::uint64_t encode_nnz_in = 0;  // operand entries shipped to all workers
  std::uint64_t compute_flops = 0;  // multiply-adds of block products, all workers
  double flops_per_worker = 0;
  std::uint64_t combine_ops = 0;  // weighting and summing, master and workers
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;  // results consumed by the master
  std::uint64_t decode_ops = 0;
  double wall_model_time = 0;
  std::vector<std::size_t> straggler_ids;
  bool verified = false;
  bool correct = false;
  SparseMatrix product;  // decoded A^T B
};

/// Draws a sparse code for N workers that tolerates `resilience` missing
/// results. Throws InsufficientWorkers if 1000 redraws all fail.
std::vector<WeightRow> resilient_sparse_code(const DegreeDistribution& p, std::size_t m,
                                             std::size_t n, std::size_t workers,
                                             std::size_t resilience, Rng& rng);

/// One master/worker round: stragglers are drawn first, then the code, then
/// every task is executed and timed; the master consumes results in
/// completion order until it can decode, decodes, and optionally verifies.
TrialResult run_trial(const SchemeSpec& spec, const SparseMatrix& a, const SparseMatrix& b,
                      std::size_t m, std::size_t n, const WorkerModel& model, Rng& rng,
                      const TrialOptions& options = {});

struct FieldSummary {
  double mean = 0;
  double stddev = 0;
};

struct SchemeSummary {
  std::string scheme;
  std::size_t trials = 0;
  std::size_t correct = 0;
  std::size_t verified = 0;
  std::map<std::string, FieldSummary> fields;
};

/// Per-scheme mean and sample standard deviation of every numeric field.
/// Throws InvalidParameter on an empty list.
std::vector<SchemeSummary> aggregate(const std::vector<TrialResult>& trials);

/// Numeric fields in CSV column order.
std::vector<std::string> trial_fields();
std::string trials_csv(const std::vector<TrialResult>& trials);
nlohmann::json to_json(const SchemeSummary& summary);

struct MatrixSpec {
  std::size_t rows = 400;
  std::size_t a_cols = 400;
  std::size_t b_cols = 400;
  std::size_t nnz_a = 4000;
  std::size_t nnz_b = 4000;
  ValueLaw law = ValueLaw::integer;
  std::string a_file;  // Matrix Market inputs override generation
  std::string b_file;
};

enum class CodeMode { fresh, fixed };

struct ExperimentConfig {
  std::vector<std::string> schemes = {"sparse"};
  std::size_t m = 4;
  std::size_t n = 4;
  WorkerModel model;
  MatrixSpec matrix;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  std::string distribution = "wave";  // wave, robust, or a distribution JSON path
  double robust_c = 0.1;
  double robust_delta = 0.5;
  CodeMode code_mode = CodeMode::fresh;
  std::size_t resilience = 1;
  std::size_t extra_rows = 0;
  bool verify = true;
  std::size_t threads = 0;

  void validate() const;
};

/// Strict parse: unknown keys and wrong types are InvalidParameter.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct ExperimentOutput {
  std::vector<TrialResult> trials;  // ordered by (trial, scheme)
  std::vector<SchemeSummary> summary;
};

/// Builds the inputs once, then runs every scheme on every trial in parallel.
/// Trial t draws from derive_rng(seed, t), so output is independent of the
/// thread count.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentOutput& output, const ExperimentConfig& cfg);

}  // namespace sparse_code
