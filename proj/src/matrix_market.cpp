#include "sparse_code/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sparse_code/error.hpp"

namespace sparse_code {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::size_t parse_index(const std::string& token, std::size_t line, const char* what) {
  std::size_t value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, std::string("bad ") + what + " '" + token + "'");
  }
  return value;
}

double parse_value(const std::string& token, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || !std::isfinite(v)) {
    throw ParseError(line, "bad value '" + token + "'");
  }
  return v;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError(line_no, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw ParseError(line_no, "unsupported object '" + object + "'");
  if (format != "coordinate") throw ParseError(line_no, "only coordinate format is supported");
  if (field != "real" && field != "integer" && field != "pattern" && field != "double") {
    throw ParseError(line_no, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric") {
    throw ParseError(line_no, "unsupported symmetry '" + symmetry + "'");
  }
  const bool pattern = field == "pattern";

  // size line, after comments
  bool found = false;
  while (!found && std::getline(in, line)) {
    ++line_no;
    found = !blank(line) && line[0] != '%';
  }
  if (!found) throw ParseError(line_no + 1, "missing size line");
  std::istringstream size_line(line);
  std::string rs, cs, ns, extra;
  if (!(size_line >> rs >> cs >> ns) || (size_line >> extra)) {
    throw ParseError(line_no, "size line needs rows, columns and entry count");
  }
  const std::size_t rows = parse_index(rs, line_no, "row count");
  const std::size_t cols = parse_index(cs, line_no, "column count");
  const std::size_t declared = parse_index(ns, line_no, "entry count");
  if (symmetry != "general" && rows != cols) {
    throw ParseError(line_no, "symmetric storage needs a square matrix");
  }

  std::vector<Triplet<double>> entries;
  entries.reserve(symmetry == "general" ? declared : 2 * declared);
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    if (seen == declared) throw ParseError(line_no, "more entries than the declared " + std::to_string(declared));
    std::istringstream fields(line);
    std::string is, js, vs;
    if (!(fields >> is >> js)) throw ParseError(line_no, "entry needs row and column");
    double value = 1.0;
    if (!pattern) {
      if (!(fields >> vs)) throw ParseError(line_no, "entry is missing its value");
      value = parse_value(vs, line_no);
    }
    if (fields >> extra) throw ParseError(line_no, "trailing tokens in entry");
    const std::size_t i = parse_index(is, line_no, "row index");
    const std::size_t j = parse_index(js, line_no, "column index");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ParseError(line_no, "index (" + is + ", " + js + ") outside " + std::to_string(rows) +
                                    "x" + std::to_string(cols));
    }
    if (symmetry != "general" && j > i) {
      throw ParseError(line_no, "symmetric storage keeps the lower triangle only");
    }
    if (symmetry == "skew-symmetric" && i == j) {
      throw ParseError(line_no, "skew-symmetric matrices have no diagonal entries");
    }
    entries.push_back({i - 1, j - 1, value});
    if (symmetry == "symmetric" && i != j) entries.push_back({j - 1, i - 1, value});
    if (symmetry == "skew-symmetric") entries.push_back({j - 1, i - 1, -value});
    ++seen;
  }
  if (seen < declared) {
    throw ParseError(line_no + 1, "expected " + std::to_string(declared) + " entries, found " +
                                      std::to_string(seen));
  }
  return from_triplets(rows, cols, std::move(entries));
}

SparseMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row.values[k]);
      out << r + 1 << ' ' << row.cols[k] + 1 << ' ' << buf << '\n';
    }
  }
}

void save_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_matrix_market(out, m);
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace sparse_code
