#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "sparse_code/error.hpp"
#include "sparse_code/rational.hpp"

namespace sparse_code {

/// Caller-owned operation counters. Operations add to it; nothing is shared.
struct CostTally {
  std::uint64_t multiply_adds = 0;  // scalar multiply-adds in products
  std::uint64_t entry_updates = 0;  // entries touched by accumulation / scaling

  std::uint64_t total() const { return multiply_adds + entry_updates; }
};

template <class Scalar>
struct Triplet {
  std::size_t row;
  std::size_t col;
  Scalar value;
};

template <class Scalar>
struct RowView {
  std::span<const std::size_t> cols;
  std::span<const Scalar> values;

  std::size_t size() const { return cols.size(); }
};

/// Compressed sparse row matrix in canonical form: column indices strictly
/// increasing within each row and no stored zeros.
template <class Scalar>
class BasicSparseMatrix {
 public:
  using value_type = Scalar;

  BasicSparseMatrix() : row_ptr_(1, 0) {}
  BasicSparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Validates the CSR arrays; throws ShapeError when they are not canonical.
  static BasicSparseMatrix from_csr(std::size_t rows, std::size_t cols,
                                    std::vector<std::size_t> row_ptr,
                                    std::vector<std::size_t> col_idx,
                                    std::vector<Scalar> values) {
    if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != col_idx.size() || col_idx.size() != values.size()) {
      throw ShapeError("inconsistent CSR array lengths");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (row_ptr[r] > row_ptr[r + 1]) throw ShapeError("row_ptr decreases");
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        if (col_idx[k] >= cols) throw ShapeError("column index out of range");
        if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
          throw ShapeError("column indices not strictly increasing");
        }
        if (values[k] == 0) throw ShapeError("explicit zero stored");
      }
    }
    BasicSparseMatrix m(rows, cols);
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const Scalar> values() const { return values_; }

  RowView<Scalar> row(std::size_t r) const {
    const auto begin = row_ptr_[r];
    const auto len = row_ptr_[r + 1] - begin;
    return {std::span<const std::size_t>(col_idx_).subspan(begin, len),
            std::span<const Scalar>(values_).subspan(begin, len)};
  }

  Scalar at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw ShapeError("index out of range");
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return Scalar(0);
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  /// Row-major dense copy.
  std::vector<Scalar> to_dense() const {
    std::vector<Scalar> dense(rows_ * cols_, Scalar(0));
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        dense[r * cols_ + col_idx_[k]] = values_[k];
      }
    }
    return dense;
  }

  std::vector<Triplet<Scalar>> triplets() const {
    std::vector<Triplet<Scalar>> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        out.push_back({r, col_idx_[k], values_[k]});
      }
    }
    return out;
  }

  friend bool operator==(const BasicSparseMatrix& a, const BasicSparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_ptr_ == b.row_ptr_ &&
           a.col_idx_ == b.col_idx_ && a.values_ == b.values_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<Scalar> values_;
};

using SparseMatrix = BasicSparseMatrix<double>;
using ExactSparseMatrix = BasicSparseMatrix<Rational>;

namespace detail {

/// Buckets by row, sorts each row by column, sums duplicates, drops zeros.
template <class Scalar>
BasicSparseMatrix<Scalar> canonicalize(std::size_t rows, std::size_t cols,
                                       std::vector<Triplet<Scalar>> entries) {
  std::vector<std::size_t> counts(rows + 1, 0);
  for (const auto& t : entries) ++counts[t.row + 1];
  for (std::size_t r = 0; r < rows; ++r) counts[r + 1] += counts[r];

  std::vector<std::pair<std::size_t, Scalar>> bucketed(entries.size());
  {
    auto cursor = counts;
    for (auto& t : entries) bucketed[cursor[t.row]++] = {t.col, std::move(t.value)};
  }
  entries.clear();
  entries.shrink_to_fit();

  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<Scalar> values;
  col_idx.reserve(bucketed.size());
  values.reserve(bucketed.size());
  for (std::size_t r = 0; r < rows; ++r) {
    auto first = bucketed.begin() + static_cast<std::ptrdiff_t>(counts[r]);
    auto last = bucketed.begin() + static_cast<std::ptrdiff_t>(counts[r + 1]);
    std::stable_sort(first, last,
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last;) {
      const std::size_t c = it->first;
      Scalar sum = std::move(it->second);
      for (++it; it != last && it->first == c; ++it) sum += it->second;
      if (!(sum == 0)) {
        col_idx.push_back(c);
        values.push_back(std::move(sum));
      }
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return BasicSparseMatrix<Scalar>::from_csr(rows, cols, std::move(row_ptr),
                                             std::move(col_idx), std::move(values));
}

inline std::string shape_string(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

/// Builds a canonical matrix; duplicate positions are summed and resulting
/// zeros dropped. Throws InvalidTriplet on an out-of-range index.
template <class Scalar>
BasicSparseMatrix<Scalar> from_triplets(std::size_t rows, std::size_t cols,
                                        std::vector<Triplet<Scalar>> entries) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw InvalidTriplet("triplet (" + std::to_string(t.row) + "," +
                           std::to_string(t.col) + ") outside " +
                           detail::shape_string(rows, cols));
    }
  }
  return detail::canonicalize(rows, cols, std::move(entries));
}

inline SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet<double>> entries) {
  return from_triplets<double>(rows, cols, std::move(entries));
}

/// Converts scalar type entry by entry (e.g. double <-> Rational).
template <class To, class From>
BasicSparseMatrix<To> convert(const BasicSparseMatrix<From>& m) {
  std::vector<To> values;
  values.reserve(m.nnz());
  for (const auto& v : m.values()) {
    if constexpr (std::is_same_v<To, double> && std::is_same_v<From, Rational>) {
      values.push_back(v.get_d());
    } else {
      values.push_back(To(v));
    }
  }
  std::vector<std::size_t> row_ptr(m.row_ptr().begin(), m.row_ptr().end());
  std::vector<std::size_t> col_idx(m.col_idx().begin(), m.col_idx().end());
  return BasicSparseMatrix<To>::from_csr(m.rows(), m.cols(), std::move(row_ptr),
                                         std::move(col_idx), std::move(values));
}

/// Column width of each part when splitting `cols` columns into `parts`;
/// the last part is zero-padded up to this width.
inline std::size_t part_width(std::size_t cols, std::size_t parts) {
  return (cols + parts - 1) / parts;
}

/// Splits M into `parts` equal-width column blocks.
template <class Scalar>
std::vector<BasicSparseMatrix<Scalar>> split_columns(const BasicSparseMatrix<Scalar>& m,
                                                     std::size_t parts) {
  if (parts == 0 || parts > m.cols()) {
    throw InvalidPartition("cannot split " + std::to_string(m.cols()) + " columns into " +
                           std::to_string(parts) + " parts");
  }
  const std::size_t width = part_width(m.cols(), parts);
  std::vector<std::vector<Triplet<Scalar>>> pieces(parts);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const std::size_t c = row.cols[k];
      pieces[c / width].push_back({r, c % width, row.values[k]});
    }
  }
  std::vector<BasicSparseMatrix<Scalar>> out;
  out.reserve(parts);
  for (auto& piece : pieces) {
    out.push_back(detail::canonicalize(m.rows(), width, std::move(piece)));
  }
  return out;
}

/// Inverse of split_columns: concatenates horizontally and drops columns at or
/// beyond `cols` (the padding).
template <class Scalar>
BasicSparseMatrix<Scalar> concatenate_columns(std::span<const BasicSparseMatrix<Scalar>> parts,
                                              std::size_t cols) {
  if (parts.empty()) throw InvalidPartition("nothing to concatenate");
  const std::size_t rows = parts.front().rows();
  std::vector<Triplet<Scalar>> entries;
  std::size_t offset = 0;
  for (const auto& part : parts) {
    if (part.rows() != rows) throw ShapeError("row counts differ across parts");
    for (auto& t : part.triplets()) {
      const std::size_t c = t.col + offset;
      if (c < cols) entries.push_back({t.row, c, std::move(t.value)});
    }
    offset += part.cols();
  }
  if (offset < cols) throw ShapeError("parts narrower than requested width");
  return detail::canonicalize(rows, cols, std::move(entries));
}

/// Ai^T * Bj computed row by row over the shared dimension, without forming
/// Ai^T. Adds the number of scalar multiply-adds to `tally`.
template <class Scalar>
BasicSparseMatrix<Scalar> block_product(const BasicSparseMatrix<Scalar>& ai,
                                        const BasicSparseMatrix<Scalar>& bj, CostTally& tally) {
  if (ai.rows() != bj.rows()) {
    throw ShapeError("block_product: " + detail::shape_string(ai.rows(), ai.cols()) +
                     " vs " + detail::shape_string(bj.rows(), bj.cols()));
  }
  std::size_t work = 0;
  for (std::size_t r = 0; r < ai.rows(); ++r) work += ai.row(r).size() * bj.row(r).size();
  std::vector<Triplet<Scalar>> entries;
  entries.reserve(work);
  for (std::size_t r = 0; r < ai.rows(); ++r) {
    const auto a = ai.row(r);
    const auto b = bj.row(r);
    for (std::size_t p = 0; p < a.size(); ++p) {
      for (std::size_t q = 0; q < b.size(); ++q) {
        entries.push_back({a.cols[p], b.cols[q], Scalar(a.values[p] * b.values[q])});
      }
    }
  }
  tally.multiply_adds += work;
  return detail::canonicalize(ai.cols(), bj.cols(), std::move(entries));
}

template <class Scalar>
BasicSparseMatrix<Scalar> block_product(const BasicSparseMatrix<Scalar>& ai,
                                        const BasicSparseMatrix<Scalar>& bj) {
  CostTally unused;
  return block_product(ai, bj, unused);
}

/// acc + coeff * x, canonical. Adds nnz(x) to `tally`.
template <class Scalar>
BasicSparseMatrix<Scalar> scaled_accumulate(const BasicSparseMatrix<Scalar>& acc,
                                            const Scalar& coeff,
                                            const BasicSparseMatrix<Scalar>& x, CostTally& tally) {
  if (acc.rows() != x.rows() || acc.cols() != x.cols()) {
    throw ShapeError("scaled_accumulate: " + detail::shape_string(acc.rows(), acc.cols()) +
                     " vs " + detail::shape_string(x.rows(), x.cols()));
  }
  tally.entry_updates += x.nnz();
  if (coeff == 0 || x.empty()) return acc;

  std::vector<std::size_t> row_ptr(acc.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<Scalar> values;
  col_idx.reserve(acc.nnz() + x.nnz());
  values.reserve(acc.nnz() + x.nnz());
  for (std::size_t r = 0; r < acc.rows(); ++r) {
    const auto a = acc.row(r);
    const auto b = x.row(r);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a.cols[i] < b.cols[j])) {
        col_idx.push_back(a.cols[i]);
        values.push_back(a.values[i]);
        ++i;
        continue;
      }
      Scalar v = coeff * b.values[j];
      const std::size_t c = b.cols[j];
      if (i < a.size() && a.cols[i] == c) {
        v += a.values[i];
        ++i;
      }
      ++j;
      if (!(v == 0)) {
        col_idx.push_back(c);
        values.push_back(std::move(v));
      }
    }
    row_ptr[r + 1] = col_idx.size();
  }
  return BasicSparseMatrix<Scalar>::from_csr(acc.rows(), acc.cols(), std::move(row_ptr),
                                             std::move(col_idx), std::move(values));
}

template <class Scalar>
BasicSparseMatrix<Scalar> scaled_accumulate(const BasicSparseMatrix<Scalar>& acc,
                                            const Scalar& coeff,
                                            const BasicSparseMatrix<Scalar>& x) {
  CostTally unused;
  return scaled_accumulate(acc, coeff, x, unused);
}

/// x / divisor entry by entry (division, not multiplication by a reciprocal,
/// so integer-valued quotients stay exact in floating point).
template <class Scalar>
BasicSparseMatrix<Scalar> divided(const BasicSparseMatrix<Scalar>& x, const Scalar& divisor,
                                  CostTally& tally) {
  if (divisor == 0) throw SingularSystem("division of a block by zero");
  tally.entry_updates += x.nnz();
  auto entries = x.triplets();
  for (auto& t : entries) t.value = Scalar(t.value / divisor);
  // canonicalize drops quotients that underflowed to zero
  return detail::canonicalize(x.rows(), x.cols(), std::move(entries));
}

/// m x n grid of blocks C_ij = A_i^T B_j. Flat index of (i, j) is i*n + j,
/// matching the column order of the coefficient matrix.
template <class Scalar>
class BasicBlockGrid {
 public:
  using Matrix = BasicSparseMatrix<Scalar>;

  BasicBlockGrid(std::size_t m, std::size_t n, std::size_t block_rows, std::size_t block_cols)
      : m_(m), n_(n), block_rows_(block_rows), block_cols_(block_cols), blocks_(m * n) {}

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  std::size_t size() const { return blocks_.size(); }
  std::size_t block_rows() const { return block_rows_; }
  std::size_t block_cols() const { return block_cols_; }
  std::size_t flat(std::size_t i, std::size_t j) const { return i * n_ + j; }

  bool has(std::size_t flat_index) const { return blocks_.at(flat_index).has_value(); }
  bool complete() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](const auto& b) { return b.has_value(); });
  }

  const Matrix& block(std::size_t flat_index) const {
    const auto& b = blocks_.at(flat_index);
    if (!b) throw ShapeError("block " + std::to_string(flat_index) + " not recovered");
    return *b;
  }
  const Matrix& block(std::size_t i, std::size_t j) const { return block(flat(i, j)); }

  void set(std::size_t flat_index, Matrix value) {
    if (value.rows() != block_rows_ || value.cols() != block_cols_) {
      throw ShapeError("block shape " + detail::shape_string(value.rows(), value.cols()) +
                       " does not match grid block " +
                       detail::shape_string(block_rows_, block_cols_));
    }
    blocks_.at(flat_index) = std::move(value);
  }

  std::size_t nnz() const {
    std::size_t total = 0;
    for (const auto& b : blocks_) total += b ? b->nnz() : 0;
    return total;
  }

  /// Reassembles the full product, stripping padding beyond rows x cols.
  Matrix assemble(std::size_t rows, std::size_t cols) const {
    if (rows > m_ * block_rows_ || cols > n_ * block_cols_) {
      throw ShapeError("assemble: requested shape exceeds grid");
    }
    std::vector<Triplet<Scalar>> entries;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        for (auto& t : block(i, j).triplets()) {
          const std::size_t r = i * block_rows_ + t.row;
          const std::size_t c = j * block_cols_ + t.col;
          if (r < rows && c < cols) entries.push_back({r, c, std::move(t.value)});
        }
      }
    }
    return detail::canonicalize(rows, cols, std::move(entries));
  }

  template <class To>
  BasicBlockGrid<To> converted() const {
    BasicBlockGrid<To> out(m_, n_, block_rows_, block_cols_);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      if (blocks_[k]) out.set(k, convert<To>(*blocks_[k]));
    }
    return out;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t block_rows_;
  std::size_t block_cols_;
  std::vector<std::optional<Matrix>> blocks_;
};

using BlockGrid = BasicBlockGrid<double>;
using ExactBlockGrid = BasicBlockGrid<Rational>;

/// Splits A (s x r) into m and B (s x t) into n column blocks and computes
/// every product: the ground-truth grid.
template <class Scalar>
BasicBlockGrid<Scalar> compute_block_grid(const BasicSparseMatrix<Scalar>& a,
                                          const BasicSparseMatrix<Scalar>& b, std::size_t m,
                                          std::size_t n, CostTally& tally) {
  if (a.rows() != b.rows()) throw ShapeError("A and B must share their row dimension");
  const auto a_parts = split_columns(a, m);
  const auto b_parts = split_columns(b, n);
  BasicBlockGrid<Scalar> grid(m, n, a_parts.front().cols(), b_parts.front().cols());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      grid.set(grid.flat(i, j), block_product(a_parts[i], b_parts[j], tally));
    }
  }
  return grid;
}

}  // namespace sparse_code
