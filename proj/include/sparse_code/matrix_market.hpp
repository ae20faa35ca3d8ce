#pragma once

#include <iosfwd>
#include <string>

#include "sparse_code/sparse_matrix.hpp"

namespace sparse_code {

/// Coordinate-format Matrix Market reader. Accepts real, integer and pattern
/// fields with general, symmetric or skew-symmetric storage; pattern entries
/// read as 1 and the mirrored triangle is filled in. Duplicates are summed.
/// Every malformed line throws ParseError carrying its 1-based line number.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix load_matrix_market(const std::string& path);

/// Writes "coordinate real general" with round-trip precision.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void save_matrix_market(const std::string& path, const SparseMatrix& m);

}  // namespace sparse_code
