#include "sparse_code/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparse_code/error.hpp"

namespace sparse_code {

void LinearProgram::add(std::vector<double> coeffs, Sense sense, double rhs) {
  if (coeffs.size() != objective.size()) {
    throw DimensionMismatch("constraint length differs from the variable count");
  }
  constraints.push_back({std::move(coeffs), sense, rhs});
}

std::string status_name(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kEps = 1e-10;
constexpr std::size_t kDegenerateRun = 64;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return data_[r * (cols_ + 1) + cols_]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t w = cols_ + 1;
    double* prow = &data_[pr * w];
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < w; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * w];
      const double f = row[pc];
      if (f == 0) continue;
      for (std::size_t j = 0; j < w; ++j) {
        if (prow[j] != 0) row[j] -= f * prow[j];
      }
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  /// Minimizes cost . x over columns not in `blocked`. Returns the status and
  /// adds to `iterations`.
  LpStatus minimize(const std::vector<double>& cost, const std::vector<bool>& blocked,
                    std::size_t& iterations, std::size_t limit) {
    std::size_t degenerate = 0;
    std::vector<double> reduced(cols_);
    while (true) {
      for (std::size_t j = 0; j < cols_; ++j) reduced[j] = cost[j];
      for (std::size_t r = 0; r < rows_; ++r) {
        const double cb = cost[basis_[r]];
        if (cb == 0) continue;
        for (std::size_t j = 0; j < cols_; ++j) reduced[j] -= cb * at(r, j);
      }
      const bool bland = degenerate >= kDegenerateRun;
      std::size_t enter = cols_;
      double best = -kEps;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (blocked[j] || reduced[j] >= -kEps) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (reduced[j] < best) {
          best = reduced[j];
          enter = j;
        }
      }
      if (enter == cols_) return LpStatus::optimal;
      if (iterations >= limit) return LpStatus::iteration_limit;

      std::size_t leave = rows_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kEps) continue;
        const double q = rhs(r) / a;
        if (q < ratio - kEps || (q <= ratio + kEps && leave < rows_ && basis_[r] < basis_[leave])) {
          ratio = std::min(ratio, q);
          leave = r;
        }
      }
      if (leave == rows_) return LpStatus::unbounded;
      degenerate = ratio <= kEps ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, std::size_t max_iterations) {
  const std::size_t n = lp.variables();
  const std::size_t m = lp.constraints.size();

  // column layout: originals, one slack/surplus per inequality, artificials
  std::size_t slacks = 0;
  for (const auto& c : lp.constraints) {
    if (c.coeffs.size() != n) throw DimensionMismatch("constraint length differs from the variable count");
    if (c.sense != Sense::equal) ++slacks;
  }
  std::vector<bool> needs_artificial(m, false);
  std::vector<double> sign(m, 1.0);
  std::vector<Sense> sense(m);
  std::size_t artificials = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = lp.constraints[i];
    sense[i] = c.sense;
    if (c.rhs < 0) {
      sign[i] = -1.0;
      if (c.sense == Sense::less_equal) sense[i] = Sense::greater_equal;
      else if (c.sense == Sense::greater_equal) sense[i] = Sense::less_equal;
    }
    needs_artificial[i] = sense[i] != Sense::less_equal;
    artificials += needs_artificial[i] ? 1 : 0;
  }

  const std::size_t cols = n + slacks + artificials;
  Tableau t(m, cols);
  std::vector<bool> is_artificial(cols, false);
  std::size_t next_slack = n;
  std::size_t next_art = n + slacks;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = lp.constraints[i];
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign[i] * c.coeffs[j];
    t.rhs(i) = sign[i] * c.rhs;
    if (c.sense != Sense::equal) {
      t.at(i, next_slack) = sense[i] == Sense::less_equal ? 1.0 : -1.0;
      if (sense[i] == Sense::less_equal) t.basis()[i] = next_slack;
      ++next_slack;
    }
    if (needs_artificial[i]) {
      t.at(i, next_art) = 1.0;
      is_artificial[next_art] = true;
      t.basis()[i] = next_art;
      ++next_art;
    }
  }

  LpSolution out;
  std::vector<bool> none(cols, false);
  if (artificials > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) phase1[j] = is_artificial[j] ? 1.0 : 0.0;
    const auto status = t.minimize(phase1, none, out.iterations, max_iterations);
    if (status == LpStatus::iteration_limit) {
      out.status = status;
      return out;
    }
    double infeasibility = 0;
    double scale = 1;
    for (std::size_t i = 0; i < m; ++i) {
      scale = std::max(scale, std::abs(lp.constraints[i].rhs));
      if (is_artificial[t.basis()[i]]) infeasibility += t.rhs(i);
    }
    if (infeasibility > 1e-9 * scale) {
      out.status = LpStatus::infeasible;
      return out;
    }
    // drive zero-level artificials out of the basis where possible
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[t.basis()[i]]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!is_artificial[j] && std::abs(t.at(i, j)) > 1e-9) {
          t.pivot(i, j);
          break;
        }
      }
    }
  }

  std::vector<double> phase2(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.objective[j];
  out.status = t.minimize(phase2, is_artificial, out.iterations, max_iterations);
  if (out.status != LpStatus::optimal) return out;

  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis()[i] < n) out.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
  }
  out.objective = 0;
  for (std::size_t j = 0; j < n; ++j) out.objective += lp.objective[j] * out.x[j];
  return out;
}

}  // namespace sparse_code
