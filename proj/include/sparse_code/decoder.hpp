#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sparse_code/encoder.hpp"
#include "sparse_code/error.hpp"
#include "sparse_code/rational.hpp"
#include "sparse_code/sparse_matrix.hpp"

namespace sparse_code {

/// Incremental exact Gaussian elimination over the rationals.
///
/// Each stored pivot row has its leading nonzero at the column it is filed
/// under and is normalized to 1 there. With `track_combinations`, every pivot
/// also remembers how it is built from the inserted rows, which is what lets
/// `solve_combination` express a target vector in terms of the original rows.
class EchelonState {
 public:
  explicit EchelonState(std::size_t width, bool track_combinations = false);

  /// Returns true when the row raised the rank. Throws ShapeError if a weight
  /// column is outside the width.
  bool insert(const WeightRow& row);
  bool insert(std::span<const Rational> dense_row);

  std::size_t width() const { return pivots_.size(); }
  std::size_t rank() const { return rank_; }
  std::size_t inserted_rows() const { return inserted_; }
  bool full_rank() const { return rank_ == pivots_.size(); }

  /// Inserted-row indices that became pivots, in insertion order.
  std::vector<std::size_t> pivot_sources() const;

  /// u over the inserted rows with sum_k u_k row_k == target, supported on the
  /// pivot rows; nullopt when target is outside the row space.
  /// Requires track_combinations.
  std::optional<std::vector<Rational>> solve_combination(std::span<const Rational> target) const;

 private:
  struct Pivot {
    std::vector<Rational> row;
    std::vector<Rational> combination;  // over inserted rows, may be shorter
    std::size_t source = 0;
  };

  std::vector<std::optional<Pivot>> pivots_;
  std::size_t rank_ = 0;
  std::size_t inserted_ = 0;
  bool track_;
};

/// Coefficients u with sum_k u_k rows[k] = e_{k0}, solved exactly. When there
/// are more rows than needed, u is supported on the rows that first raise the
/// rank. Throws RankDeficient when e_{k0} is not in the row space.
std::vector<Rational> rooting_combination(std::span<const WeightRow> rows, std::size_t width,
                                          std::size_t k0);

/// Chooses the column to recover by a rooting step. Receives each column's
/// incidence (number of collected rows containing it) and the resolved flags;
/// must return an unresolved column.
using RootPicker =
    std::function<std::size_t(std::span<const std::size_t> incidence, const std::vector<bool>& resolved)>;

/// Highest incidence, ties to the lowest index. The default.
RootPicker max_incidence_root();
RootPicker lowest_index_root();
/// Uniformly random unresolved column (the literal "randomly pick" rule).
RootPicker uniform_random_root(std::uint64_t seed);
/// Uses `order` first (skipping resolved columns), then `fallback`.
RootPicker scripted_roots(std::vector<std::size_t> order, RootPicker fallback = max_incidence_root());

struct DecodeOptions {
  RootPicker pick_root = max_incidence_root();
};

enum class StepKind { peel, root };

struct DecodeStep {
  StepKind kind;
  std::size_t column;
  std::optional<std::size_t> source_row;  // ripple row for a peel
};

struct DecodePlan {
  std::vector<DecodeStep> steps;
  std::size_t peeled = 0;
  std::size_t rooted = 0;
};

struct DecodeStats {
  std::size_t peeled = 0;
  std::size_t rooted = 0;
  std::uint64_t block_op_count = 0;
  std::size_t rows_used = 0;
  std::vector<std::size_t> recovery_order;  // flat block indices
};

nlohmann::json to_json(const DecodeStats& stats);

struct RootingRecord {
  std::size_t column;
  std::vector<Rational> coefficients;  // over the collected tasks, in input order
};

namespace detail {

/// Peeling with rooting fallback over the coefficient structure. The sink
/// sees peel(row, column, weight), root(column, residual_rows) and
/// subtract(row, column, weight) calls in the exact order the algorithm
/// performs them; residual rows have resolved columns removed.
template <class Sink>
void run_hybrid(std::span<const WeightRow> rows, std::span<const std::size_t> worker_ids,
                std::size_t width, const RootPicker& pick_root, Sink& sink) {
  std::vector<WeightRow> residual(rows.begin(), rows.end());
  std::vector<std::vector<std::size_t>> column_rows(width);
  for (std::size_t k = 0; k < residual.size(); ++k) {
    for (const auto& e : residual[k]) {
      if (e.column >= width) throw ShapeError("weight column outside the block grid");
      column_rows[e.column].push_back(k);
    }
  }
  std::vector<std::size_t> incidence(width);
  for (std::size_t c = 0; c < width; ++c) incidence[c] = column_rows[c].size();

  std::set<std::pair<std::size_t, std::size_t>> ripples;  // (worker id, row)
  for (std::size_t k = 0; k < residual.size(); ++k) {
    if (residual[k].size() == 1) ripples.insert({worker_ids[k], k});
  }

  std::vector<bool> resolved(width, false);
  for (std::size_t done = 0; done < width; ++done) {
    std::size_t column = 0;
    std::optional<std::size_t> source;
    if (!ripples.empty()) {
      const auto [worker, k] = *ripples.begin();
      const auto& entry = residual[k].front();
      column = entry.column;
      source = k;
      sink.peel(k, column, entry.weight);
    } else {
      column = pick_root(incidence, resolved);
      if (column >= width || resolved[column]) {
        throw InvalidParameter("root picker returned an invalid column");
      }
      sink.root(column, std::span<const WeightRow>(residual));
    }
    resolved[column] = true;
    for (const auto k : column_rows[column]) {
      auto& row = residual[k];
      const auto it = std::find_if(row.begin(), row.end(),
                                   [column](const WeightEntry& e) { return e.column == column; });
      if (it == row.end()) continue;
      if (!source || *source != k) sink.subtract(k, column, it->weight);
      const std::size_t before = row.size();
      row.erase(it);
      if (before == 1) ripples.erase({worker_ids[k], k});
      if (before == 2) ripples.insert({worker_ids[k], k});
    }
  }
}

struct PlanSink {
  DecodePlan plan;
  void peel(std::size_t row, std::size_t column, const Integer&) {
    plan.steps.push_back({StepKind::peel, column, row});
    ++plan.peeled;
  }
  void root(std::size_t column, std::span<const WeightRow>) {
    plan.steps.push_back({StepKind::root, column, std::nullopt});
    ++plan.rooted;
  }
  void subtract(std::size_t, std::size_t, const Integer&) {}
};

void require_full_rank(std::span<const WeightRow> rows, std::size_t width);

/// sum_k coeffs[k] * payloads[k] for the nonzero coefficients.
///
/// Floating-point payloads use the common denominator q of the coefficients:
/// the integer-numerator sum is exact whenever it stays below 2^53 on
/// integer-valued data, and one final division by q then rounds once. Outside
/// that range the sum is formed in exact rational arithmetic and rounded.
template <class Scalar>
BasicSparseMatrix<Scalar> combine(std::span<const Rational> coeffs,
                                  std::span<const BasicSparseMatrix<Scalar>> payloads,
                                  std::size_t rows, std::size_t cols, CostTally& tally) {
  if constexpr (std::is_same_v<Scalar, Rational>) {
    bool integral = true;
    Integer denominator = 1;
    for (std::size_t k = 0; k < coeffs.size() && integral; ++k) {
      if (coeffs[k] == 0) continue;
      mpz_lcm(denominator.get_mpz_t(), denominator.get_mpz_t(), coeffs[k].get_den_mpz_t());
      for (const auto& v : payloads[k].values()) {
        if (v.get_den() != 1) {
          integral = false;
          break;
        }
      }
    }
    if (!integral) {
      ExactSparseMatrix acc(rows, cols);
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] == 0) continue;
        acc = scaled_accumulate(acc, coeffs[k], payloads[k], tally);
      }
      return acc;
    }
    // integer payloads: accumulate numerators in mpz and divide once, which
    // skips the gcd normalization after every rational operation
    BasicSparseMatrix<Integer> acc(rows, cols);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (coeffs[k] == 0) continue;
      const Integer scale = coeffs[k].get_num() * (denominator / coeffs[k].get_den());
      const auto& x = payloads[k];
      std::vector<Integer> nums;
      nums.reserve(x.nnz());
      for (const auto& v : x.values()) nums.push_back(v.get_num());
      const auto xi = BasicSparseMatrix<Integer>::from_csr(
          x.rows(), x.cols(), {x.row_ptr().begin(), x.row_ptr().end()},
          {x.col_idx().begin(), x.col_idx().end()}, std::move(nums));
      acc = scaled_accumulate(acc, scale, xi, tally);
    }
    std::vector<Rational> values;
    values.reserve(acc.nnz());
    for (const auto& v : acc.values()) {
      Rational q(v, denominator);
      q.canonicalize();
      values.push_back(std::move(q));
    }
    return ExactSparseMatrix::from_csr(rows, cols, {acc.row_ptr().begin(), acc.row_ptr().end()},
                                       {acc.col_idx().begin(), acc.col_idx().end()},
                                       std::move(values));
  } else {
    constexpr double exact_limit = 0x1.0p52;
    Integer denominator = 1;
    for (const auto& u : coeffs) {
      if (u != 0) mpz_lcm(denominator.get_mpz_t(), denominator.get_mpz_t(), u.get_den_mpz_t());
    }
    bool exact = denominator <= Integer(static_cast<unsigned long>(exact_limit));
    double bound = 0;
    std::vector<double> numerators(coeffs.size(), 0.0);
    for (std::size_t k = 0; exact && k < coeffs.size(); ++k) {
      if (coeffs[k] == 0) continue;
      const Integer v = coeffs[k].get_num() * (denominator / coeffs[k].get_den());
      if (abs(v) > Integer(static_cast<unsigned long>(exact_limit))) {
        exact = false;
        break;
      }
      numerators[k] = v.get_d();
      double largest = 0;
      for (const double x : payloads[k].values()) {
        if (x != std::trunc(x)) exact = false;
        largest = std::max(largest, std::abs(x));
      }
      bound += std::abs(numerators[k]) * largest;
    }
    if (exact && bound < exact_limit) {
      SparseMatrix acc(rows, cols);
      for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] == 0) continue;
        acc = scaled_accumulate(acc, numerators[k], payloads[k], tally);
      }
      if (denominator == 1) return acc;
      return divided(acc, denominator.get_d(), tally);
    }
    ExactSparseMatrix acc(rows, cols);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (coeffs[k] == 0) continue;
      acc = scaled_accumulate(acc, coeffs[k], convert<Rational>(payloads[k]), tally);
    }
    return convert<double>(acc);
  }
}

template <class Scalar>
struct PayloadSink {
  using Matrix = BasicSparseMatrix<Scalar>;

  std::vector<Matrix> payloads;
  BasicBlockGrid<Scalar> grid;
  std::size_t width;
  CostTally tally;
  DecodeStats stats;
  std::vector<RootingRecord> rootings;
  Matrix current;

  void peel(std::size_t row, std::size_t column, const Integer& weight) {
    current = divided(payloads[row], to_scalar<Scalar>(weight), tally);
    finish(column);
    ++stats.peeled;
  }
  void root(std::size_t column, std::span<const WeightRow> residual) {
    auto u = rooting_combination(residual, width, column);
    current = combine<Scalar>(u, payloads, grid.block_rows(), grid.block_cols(), tally);
    rootings.push_back({column, std::move(u)});
    finish(column);
    ++stats.rooted;
  }
  void subtract(std::size_t row, std::size_t, const Integer& weight) {
    payloads[row] =
        scaled_accumulate(payloads[row], Scalar(-to_scalar<Scalar>(weight)), current, tally);
  }

 private:
  void finish(std::size_t column) {
    grid.set(column, current);
    stats.recovery_order.push_back(column);
  }
};

}  // namespace detail

/// Structure-only run of the hybrid decoder (no block data). Throws
/// RankDeficient when the rows do not have full column rank.
DecodePlan plan_hybrid_decode(std::span<const WeightRow> rows,
                              std::span<const std::size_t> worker_ids, std::size_t width,
                              const DecodeOptions& options = {});

template <class Scalar>
struct HybridDecodeResult {
  BasicBlockGrid<Scalar> blocks;
  DecodeStats stats;
  std::vector<RootingRecord> rootings;
};

/// Peeling decoder with rooting steps. Repeatedly: recover a block from a
/// ripple (lowest worker id first) by dividing by its weight, or, when no
/// ripple exists, recover the picked column through rooting_combination on
/// the residual rows; then subtract the block from every other result that
/// still contains it. Throws RankDeficient if the rows lack full rank.
template <class Scalar>
HybridDecodeResult<Scalar> hybrid_decode(std::span<const BasicCodedTask<Scalar>> tasks,
                                         std::size_t m, std::size_t n,
                                         const DecodeOptions& options = {}) {
  const std::size_t width = m * n;
  if (tasks.empty()) throw RankDeficient("no tasks collected");
  std::vector<WeightRow> rows;
  std::vector<std::size_t> workers;
  detail::PayloadSink<Scalar> sink{{}, BasicBlockGrid<Scalar>(m, n, 0, 0), width, {}, {}, {}, {}};
  for (const auto& t : tasks) {
    if (!t.result) throw InvalidParameter("task " + std::to_string(t.worker_id) + " has no result");
    rows.push_back(t.weights);
    workers.push_back(t.worker_id);
    sink.payloads.push_back(*t.result);
  }
  const auto& first = sink.payloads.front();
  for (const auto& p : sink.payloads) {
    if (p.rows() != first.rows() || p.cols() != first.cols()) {
      throw ShapeError("task results differ in shape");
    }
  }
  detail::require_full_rank(rows, width);
  sink.grid = BasicBlockGrid<Scalar>(m, n, first.rows(), first.cols());
  detail::run_hybrid(std::span<const WeightRow>(rows), std::span<const std::size_t>(workers),
                     width, options.pick_root, sink);
  sink.stats.rows_used = tasks.size();
  sink.stats.block_op_count = sink.tally.total();
  return {std::move(sink.grid), std::move(sink.stats), std::move(sink.rootings)};
}

/// Exact inverse by Gauss-Jordan elimination; throws SingularSystem.
std::vector<std::vector<Rational>> invert(std::vector<std::vector<Rational>> matrix);

template <class Scalar>
struct PolynomialDecodeResult {
  BasicBlockGrid<Scalar> blocks;
  std::uint64_t block_op_count = 0;
  std::vector<std::size_t> workers_used;
};

/// Recovers all blocks from the first mn tasks by solving the mn x mn system
/// exactly. Throws InsufficientWorkers with fewer than mn tasks and
/// SingularSystem when evaluation points repeat.
template <class Scalar>
PolynomialDecodeResult<Scalar> decode_polynomial(std::span<const BasicCodedTask<Scalar>> tasks,
                                                 std::size_t m, std::size_t n) {
  const std::size_t width = m * n;
  if (tasks.size() < width) {
    throw InsufficientWorkers("polynomial decoding needs " + std::to_string(width) +
                              " results, got " + std::to_string(tasks.size()));
  }
  std::vector<std::vector<Rational>> system(width, std::vector<Rational>(width, Rational(0)));
  std::vector<BasicSparseMatrix<Scalar>> payloads;
  PolynomialDecodeResult<Scalar> out{BasicBlockGrid<Scalar>(m, n, 0, 0), 0, {}};
  for (std::size_t k = 0; k < width; ++k) {
    const auto& t = tasks[k];
    if (!t.result) throw InvalidParameter("task " + std::to_string(t.worker_id) + " has no result");
    for (const auto& e : t.weights) {
      if (e.column >= width) throw ShapeError("weight column outside the block grid");
      system[k][e.column] = Rational(e.weight);
    }
    payloads.push_back(*t.result);
    out.workers_used.push_back(t.worker_id);
  }
  const auto inverse = invert(std::move(system));
  out.blocks = BasicBlockGrid<Scalar>(m, n, payloads.front().rows(), payloads.front().cols());
  CostTally tally;
  for (std::size_t c = 0; c < width; ++c) {
    out.blocks.set(c, detail::combine<Scalar>(inverse[c], payloads, payloads.front().rows(),
                                              payloads.front().cols(), tally));
  }
  out.block_op_count = tally.total();
  return out;
}

}  // namespace sparse_code
