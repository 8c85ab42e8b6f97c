#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "risbeam/common.hpp"

namespace risbeam {

// maximize c'x  subject to  A x <= b,  x free.
struct LinearProgram {
  RVector objective;
  RMatrix constraints;  // one row per constraint
  RVector bounds;
  std::vector<std::string> labels;  // one per variable, optional
  // Optional starting vertex: indices of exactly n constraints that are tight
  // at a feasible vertex and whose rows are linearly independent.
  std::vector<int> start_basis;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_rows() const { return constraints.rows(); }
  void validate() const;
  // max_i (a_i'x - b_i), clamped at zero.
  double feasibility_residual(const RVector& x) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct LpSolution {
  RVector x;
  double objective_value = 0.0;
  LpStatus status = LpStatus::NumericalFailure;
  int iterations = 0;
  std::vector<int> basis;  // active constraint rows at the returned vertex
};

enum class PivotRule {
  // Smallest-index entering and leaving choices throughout.
  Bland,
  // Most negative multiplier; falls back to Bland while pivots are degenerate.
  DantzigWithBland,
  // Largest objective rate per unit step; falls back to Bland while pivots
  // are degenerate.
  SteepestEdgeWithBland,
};

struct LpOptions {
  double tol = 1e-8;
  PivotRule rule = PivotRule::SteepestEdgeWithBland;
  int max_iterations = 200000;
  int refactor_every = 64;
};

// Uses the vertex (active-set) simplex when `lp.start_basis` is given, the
// two-phase tableau simplex otherwise.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

// Active-set primal simplex from a feasible starting vertex.
LpSolution solve_from_vertex(const LinearProgram& lp, const LpOptions& options = {});

// Dense two-phase tableau simplex with Bland's rule; free variables are split.
LpSolution solve_tableau(const LinearProgram& lp, const LpOptions& options = {});

const char* to_string(LpStatus status);

// Text dump:
//   max <n>
//   c' <c_0> ... <c_{n-1}>
//   A <m> <n>
//   <row 0 coefficients> | <b_0>
//   ...
//   end
void write_lp(std::ostream& out, const LinearProgram& lp);
LinearProgram read_lp(std::istream& in);

}  // namespace risbeam
