#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sparse_code/degree_distribution.hpp"
#include "sparse_code/random.hpp"
#include "sparse_code/rational.hpp"
#include "sparse_code/sparse_matrix.hpp"

namespace sparse_code {

struct WeightEntry {
  std::size_t column;  // flat block index i*n + j
  Integer weight;      // never zero

  friend bool operator==(const WeightEntry& a, const WeightEntry& b) {
    return a.column == b.column && a.weight == b.weight;
  }
};

/// One row of the coefficient matrix, sorted by column.
using WeightRow = std::vector<WeightEntry>;

/// The nonzero weight alphabet {1, ..., max}.
class WeightSet {
 public:
  explicit WeightSet(std::uint64_t max);
  /// {1, ..., m^2 n^2}
  static WeightSet for_grid(std::size_t m, std::size_t n);

  std::uint64_t max() const { return max_; }
  bool contains(const Integer& w) const { return w >= 1 && w <= max_; }
  Integer sample(Rng& rng) const;

 private:
  std::uint64_t max_;
};

enum class Scheme { uncoded, sparse, polynomial };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

/// A worker's assignment: C~_k = sum_ij w_ij A_i^T B_j. `result` is filled
/// once the worker finishes.
template <class Scalar>
struct BasicCodedTask {
  std::size_t worker_id = 0;
  WeightRow weights;
  std::optional<BasicSparseMatrix<Scalar>> result;
  double completion_time = 0;
};

using CodedTask = BasicCodedTask<double>;
using ExactCodedTask = BasicCodedTask<Rational>;

/// K x mn integer matrix stacking the weight rows of collected tasks.
class CoefficientMatrix {
 public:
  explicit CoefficientMatrix(std::size_t cols) : cols_(cols) {}

  void append(WeightRow row);
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t nnz() const;
  std::span<const WeightRow> rows() const { return rows_; }
  std::vector<Rational> dense_row(std::size_t k) const;

 private:
  std::size_t cols_;
  std::vector<WeightRow> rows_;
};

template <class Scalar>
CoefficientMatrix coefficient_matrix(std::span<const BasicCodedTask<Scalar>> tasks,
                                     std::size_t cols) {
  CoefficientMatrix m(cols);
  for (const auto& t : tasks) m.append(t.weights);
  return m;
}

/// Support from sample_support, weights i.i.d. uniform on the weight set.
WeightRow sparse_code_row(const DegreeDistribution& p, const WeightSet& weights, Rng& rng);

/// N tasks of the (P, [m^2 n^2]) sparse code. Throws DimensionMismatch when
/// P.d != m*n.
std::vector<CodedTask> encode_sparse(std::size_t m, std::size_t n, const DegreeDistribution& p,
                                     std::size_t workers, Rng& rng);

/// Dense row w_ij = x^(i + j*m) with 1-based block coordinates (i, j).
WeightRow polynomial_row(std::size_t m, std::size_t n, const Integer& x);

struct PolynomialCode {
  std::vector<CodedTask> tasks;
  std::vector<Integer> points;  // x_k = k for worker k-1
};

/// Throws InsufficientWorkers when N < m*n.
PolynomialCode encode_polynomial(std::size_t m, std::size_t n, std::size_t workers);

/// Worker k holds block k mod mn with unit weight (extra workers replicate
/// round-robin). Throws InsufficientWorkers when N < m*n.
std::vector<CodedTask> assign_uncoded(std::size_t m, std::size_t n, std::size_t workers);

template <class Scalar>
Scalar to_scalar(const Integer& w) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return w.get_d();
  } else {
    return Scalar(w);
  }
}

/// Lazily computed block products A_i^T B_j shared by the workers of one run.
/// Each request charges the block's measured multiply-adds to the caller.
template <class Scalar>
class BlockProducts {
 public:
  using Matrix = BasicSparseMatrix<Scalar>;

  BlockProducts(const Matrix& a, const Matrix& b, std::size_t m, std::size_t n)
      : m_(m), n_(n), a_parts_(split_columns(a, m)), b_parts_(split_columns(b, n)),
        cache_(m * n), flops_(m * n, 0) {
    if (a.rows() != b.rows()) throw ShapeError("A and B must share their row dimension");
  }

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  std::size_t block_rows() const { return a_parts_.front().cols(); }
  std::size_t block_cols() const { return b_parts_.front().cols(); }
  std::span<const Matrix> a_parts() const { return a_parts_; }
  std::span<const Matrix> b_parts() const { return b_parts_; }

  const Matrix& block(std::size_t flat, CostTally& worker) {
    if (!cache_.at(flat)) {
      CostTally own;
      cache_[flat] = block_product(a_parts_[flat / n_], b_parts_[flat % n_], own);
      flops_[flat] = own.multiply_adds;
    }
    worker.multiply_adds += flops_[flat];
    return *cache_[flat];
  }

  /// Operand entries a worker must receive to compute the blocks in `row`.
  std::size_t operand_nnz(const WeightRow& row) const {
    std::vector<bool> need_a(m_, false);
    std::vector<bool> need_b(n_, false);
    for (const auto& e : row) {
      need_a[e.column / n_] = true;
      need_b[e.column % n_] = true;
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < m_; ++i) total += need_a[i] ? a_parts_[i].nnz() : 0;
    for (std::size_t j = 0; j < n_; ++j) total += need_b[j] ? b_parts_[j].nnz() : 0;
    return total;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<Matrix> a_parts_;
  std::vector<Matrix> b_parts_;
  std::vector<std::optional<Matrix>> cache_;
  std::vector<std::uint64_t> flops_;
};

/// sum_ij w_ij C_ij for one weight row. Products are charged to
/// tally.multiply_adds, the weighted combination to tally.entry_updates.
template <class Scalar>
BasicSparseMatrix<Scalar> evaluate_task(const WeightRow& row, BlockProducts<Scalar>& blocks,
                                        CostTally& tally) {
  BasicSparseMatrix<Scalar> acc(blocks.block_rows(), blocks.block_cols());
  for (const auto& e : row) {
    const auto& block = blocks.block(e.column, tally);
    acc = scaled_accumulate(acc, to_scalar<Scalar>(e.weight), block, tally);
  }
  return acc;
}

/// Coded operands of polynomial-code worker with point x:
/// (sum_i x^i A_i, sum_j x^(j m) B_j), 1-based i and j.
template <class Scalar>
std::pair<BasicSparseMatrix<Scalar>, BasicSparseMatrix<Scalar>> polynomial_operands(
    std::span<const BasicSparseMatrix<Scalar>> a_parts,
    std::span<const BasicSparseMatrix<Scalar>> b_parts, const Integer& x, CostTally& tally) {
  const std::size_t m = a_parts.size();
  BasicSparseMatrix<Scalar> a_coded(a_parts.front().rows(), a_parts.front().cols());
  BasicSparseMatrix<Scalar> b_coded(b_parts.front().rows(), b_parts.front().cols());
  Integer power = x;
  for (std::size_t i = 0; i < m; ++i) {
    a_coded = scaled_accumulate(a_coded, to_scalar<Scalar>(power), a_parts[i], tally);
    power *= x;
  }
  Integer step;
  mpz_pow_ui(step.get_mpz_t(), x.get_mpz_t(), m);
  power = step;
  for (std::size_t j = 0; j < b_parts.size(); ++j) {
    b_coded = scaled_accumulate(b_coded, to_scalar<Scalar>(power), b_parts[j], tally);
    power *= step;
  }
  return {std::move(a_coded), std::move(b_coded)};
}

/// [{"worker": id, "weights": {"flat index": weight, ...}}, ...]; weights that
/// do not fit in 64 bits are written as decimal strings.
nlohmann::json tasks_to_json(std::span<const CodedTask> tasks);
std::vector<CodedTask> tasks_from_json(const nlohmann::json& j);

}  // namespace sparse_code
