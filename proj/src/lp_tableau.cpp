#include <cmath>
#include <vector>

#include "risbeam/lp.hpp"

namespace risbeam {

namespace {

// Tableau with the objective in the last row (reduced costs, maximization:
// optimal once every entry is >= 0) and the right-hand side in the last column.
class Tableau {
public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(RMatrix::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

  double& at(Eigen::Index i, Eigen::Index j) { return t_(i, j); }
  double& rhs(Eigen::Index i) { return t_(i, t_.cols() - 1); }
  double& cost(Eigen::Index j) { return t_(t_.rows() - 1, j); }
  double value() const { return t_(t_.rows() - 1, t_.cols() - 1); }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  std::vector<int>& basis() { return basis_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = static_cast<int>(c);
  }

  // Makes the objective row consistent with the current basis.
  void price_out() {
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double f = cost(basis_[static_cast<std::size_t>(i)]);
      if (f != 0.0) t_.row(t_.rows() - 1) -= f * t_.row(i);
    }
  }

  // Bland's rule iterations over columns [0, allowed). Returns Optimal,
  // Unbounded or NumericalFailure (iteration cap).
  LpStatus optimize(Eigen::Index allowed, double tol, int max_iter, int& iterations) {
    while (iterations < max_iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (cost(j) < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= tol) continue;
        const double ratio = rhs(i) / a;
        if (leave < 0 || ratio < best - tol ||
            (ratio <= best + tol && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++iterations;
    }
    return LpStatus::NumericalFailure;
  }

private:
  RMatrix t_;
  std::vector<int> basis_;
};

}  // namespace

LpSolution solve_tableau(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  const Eigen::Index m = lp.num_rows();
  const Eigen::Index n = lp.num_vars();
  const double tol = 1e-10;

  std::vector<Eigen::Index> negative;
  for (Eigen::Index i = 0; i < m; ++i)
    if (lp.bounds[i] < 0.0) negative.push_back(i);
  const Eigen::Index n_art = static_cast<Eigen::Index>(negative.size());
  const Eigen::Index slack0 = 2 * n;
  const Eigen::Index art0 = slack0 + m;

  Tableau tab(m, art0 + n_art);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = lp.bounds[i] < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      tab.at(i, j) = sign * lp.constraints(i, j);
      tab.at(i, n + j) = -sign * lp.constraints(i, j);
    }
    tab.at(i, slack0 + i) = sign;
    tab.rhs(i) = sign * lp.bounds[i];
    if (sign < 0.0) {
      tab.at(i, art0 + k) = 1.0;
      tab.basis()[static_cast<std::size_t>(i)] = static_cast<int>(art0 + k);
      ++k;
    } else {
      tab.basis()[static_cast<std::size_t>(i)] = static_cast<int>(slack0 + i);
    }
  }

  LpSolution sol;
  int iterations = 0;
  if (n_art > 0) {
    for (Eigen::Index a = 0; a < n_art; ++a) tab.cost(art0 + a) = 1.0;  // maximize -sum(artificials)
    tab.price_out();
    const LpStatus phase1 = tab.optimize(art0 + n_art, tol, options.max_iterations, iterations);
    if (phase1 != LpStatus::Optimal) {
      sol.status = LpStatus::NumericalFailure;
      sol.iterations = iterations;
      return sol;
    }
    if (tab.value() < -options.tol * (1.0 + lp.bounds.lpNorm<Eigen::Infinity>())) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iterations;
      return sol;
    }
    // Drive remaining zero-valued artificials out of the basis.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] < art0) continue;
      for (Eigen::Index j = 0; j < art0; ++j) {
        if (std::abs(tab.at(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  for (Eigen::Index j = 0; j <= art0 + n_art; ++j) tab.cost(j) = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    tab.cost(j) = -lp.objective[j];
    tab.cost(n + j) = lp.objective[j];
  }
  tab.price_out();
  const LpStatus phase2 = tab.optimize(art0, tol, options.max_iterations, iterations);
  sol.iterations = iterations;
  if (phase2 != LpStatus::Optimal) {
    sol.status = phase2;
    return sol;
  }

  RVector z = RVector::Zero(art0 + n_art);
  for (Eigen::Index i = 0; i < m; ++i) z[tab.basis()[static_cast<std::size_t>(i)]] = tab.rhs(i);
  sol.x = z.head(n) - z.segment(n, n);
  sol.objective_value = lp.objective.dot(sol.x);
  const double scale = 1.0 + lp.bounds.lpNorm<Eigen::Infinity>();
  sol.status = lp.feasibility_residual(sol.x) <= options.tol * scale ? LpStatus::Optimal : LpStatus::NumericalFailure;
  return sol;
}

}  // namespace risbeam
