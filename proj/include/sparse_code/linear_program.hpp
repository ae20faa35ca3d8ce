#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sparse_code {

enum class Sense { less_equal, greater_equal, equal };

struct LinearConstraint {
  std::vector<double> coeffs;
  Sense sense = Sense::less_equal;
  double rhs = 0;
};

/// minimize objective . x subject to the constraints and x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;

  std::size_t variables() const { return objective.size(); }
  void add(std::vector<double> coeffs, Sense sense, double rhs);
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

std::string status_name(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0;
  std::size_t iterations = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots so cycling cannot stall it. Meant for the
/// small programs of the optimizer (tens of variables, hundreds of rows).
LpSolution solve_lp(const LinearProgram& lp, std::size_t max_iterations = 100000);

}  // namespace sparse_code
