#include <gtest/gtest.h>

#include <sstream>

#include "sparse_code/error.hpp"
#include "sparse_code/matrix_market.hpp"
#include "sparse_code/simulation.hpp"

using namespace sparse_code;

namespace {

SparseMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

}  // namespace

TEST(MatrixMarket, SingleEntryIsZeroBased) {
  const auto m = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 5.0\n");
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.nnz(), 1u);
  EXPECT_EQ(m.at(0, 1), 5.0);
}

TEST(MatrixMarket, PatternSymmetricExpands) {
  const auto m = parse("%%MatrixMarket matrix coordinate pattern symmetric\n% comment\n2 2 1\n2 1\n");
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.at(1, 0), 1.0);
  EXPECT_EQ(m.at(0, 1), 1.0);
}

TEST(MatrixMarket, SkewSymmetricNegatesMirror) {
  const auto m = parse("%%MatrixMarket matrix coordinate integer skew-symmetric\n3 3 1\n3 1 4\n");
  EXPECT_EQ(m.at(2, 0), 4.0);
  EXPECT_EQ(m.at(0, 2), -4.0);
}

TEST(MatrixMarket, DiagonalOfSymmetricNotDoubled) {
  const auto m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 3\n2 1 1\n");
  EXPECT_EQ(m.at(0, 0), 3.0);
  EXPECT_EQ(m.nnz(), 3u);
}

TEST(MatrixMarket, TruncatedFileReportsLine) {
  try {
    parse("%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 2\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(MatrixMarket, MalformedInputs) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n"), ParseError);
  EXPECT_THROW(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n"), ParseError);
  try {
    parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(MatrixMarket, WriteThenReadIsIdentity) {
  Rng rng = derive_rng(1, 0);
  const auto a = generate_random_sparse(40, 30, 200, ValueLaw::integer, rng);
  std::ostringstream os;
  write_matrix_market(os, a);
  EXPECT_EQ(parse(os.str()), a);

  const auto f = from_triplets(2, 3, {{0, 0, 0.1}, {1, 2, -1e-300}, {1, 0, 3.141592653589793}});
  std::ostringstream fs;
  write_matrix_market(fs, f);
  EXPECT_EQ(parse(fs.str()), f);
}
