#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "risbeam/lp.hpp"

namespace risbeam {

void LinearProgram::validate() const {
  const auto n = num_vars();
  if (n == 0) throw std::invalid_argument("linear program: no variables");
  if (constraints.cols() != n) throw std::invalid_argument("linear program: constraint width does not match objective");
  if (bounds.size() != constraints.rows()) throw std::invalid_argument("linear program: bounds length does not match rows");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("linear program: label count does not match variables");
}

double LinearProgram::feasibility_residual(const RVector& x) const {
  if (constraints.rows() == 0) return 0.0;
  return std::max(0.0, (constraints * x - bounds).maxCoeff());
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

namespace {

struct SparseRow {
  std::vector<int> cols;
  std::vector<double> vals;
  double norm = 0.0;

  double dot(const RVector& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * v[cols[k]];
    return s;
  }
};

std::vector<SparseRow> sparse_rows(const RMatrix& a) {
  std::vector<SparseRow> rows(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      if (v != 0.0) {
        r.cols.push_back(static_cast<int>(j));
        r.vals.push_back(v);
        r.norm += v * v;
      }
    }
    r.norm = std::sqrt(r.norm);
  }
  return rows;
}

// Column-major sparse copy of A, used to form A d touching only the columns
// where the search direction is nonzero.
struct SparseColumns {
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<double>> vals;
};

SparseColumns sparse_columns(const RMatrix& a) {
  SparseColumns out;
  out.rows.resize(static_cast<std::size_t>(a.cols()));
  out.vals.resize(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      if (v != 0.0) {
        out.rows[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
        out.vals[static_cast<std::size_t>(j)].push_back(v);
      }
    }
  }
  return out;
}

class VertexSimplex {
public:
  VertexSimplex(const LinearProgram& lp, const LpOptions& opt)
      : lp_(lp),
        opt_(opt),
        m_(lp.num_rows()),
        n_(lp.num_vars()),
        rows_(sparse_rows(lp.constraints)),
        cols_(sparse_columns(lp.constraints)) {
    for (Eigen::Index k = 0; k < n_; ++k)
      if (lp.objective[k] != 0.0) c_nonzero_.push_back(static_cast<int>(k));
  }

  LpSolution run() {
    LpSolution sol;
    basis_ = lp_.start_basis;
    if (static_cast<Eigen::Index>(basis_.size()) != n_)
      throw std::invalid_argument("vertex simplex: start basis must have one row per variable");
    active_.assign(static_cast<std::size_t>(m_), 0);
    for (int r : basis_) {
      if (r < 0 || r >= m_ || active_[static_cast<std::size_t>(r)])
        throw std::invalid_argument("vertex simplex: start basis rows must be distinct and in range");
      active_[static_cast<std::size_t>(r)] = 1;
    }
    if (!refactor()) {
      sol.status = LpStatus::NumericalFailure;
      return sol;
    }
    if (lp_.feasibility_residual(x_) > start_tolerance())
      throw std::invalid_argument("vertex simplex: start basis is not a feasible vertex");

    RVector s(m_);
    std::vector<int> support;
    int degenerate_run = 0;
    int since_refactor = 0;
    int iter = 0;
    for (; iter < opt_.max_iterations; ++iter) {
      const bool bland = opt_.rule == PivotRule::Bland || degenerate_run > kDegenerateSwitch;

      // Multipliers y solve B' y = c. Moving off row p follows -Binv e_p.
      RVector y = RVector::Zero(n_);
      for (int k : c_nonzero_) y += lp_.objective[k] * binv_.row(k).transpose();

      int leave = -1;
      double leave_score = 0.0;
      for (Eigen::Index p = 0; p < n_; ++p) {
        if (y[p] >= -opt_.tol * dual_scale_) continue;
        double score = -y[p];
        if (!bland && opt_.rule == PivotRule::SteepestEdgeWithBland) score /= binv_.col(p).norm();
        if (leave < 0) {
          leave = static_cast<int>(p);
          leave_score = score;
        } else if (bland) {
          if (basis_[p] < basis_[leave]) leave = static_cast<int>(p);
        } else if (score > leave_score || (score == leave_score && basis_[p] < basis_[leave])) {
          leave = static_cast<int>(p);
          leave_score = score;
        }
      }
      if (leave < 0) break;  // KKT satisfied

      const RVector d = -binv_.col(leave);
      const double dnorm = d.lpNorm<Eigen::Infinity>();
      support.clear();
      for (Eigen::Index j = 0; j < n_; ++j)
        if (std::abs(d[j]) > 1e-15 * dnorm) support.push_back(static_cast<int>(j));
      s.setZero();
      for (int j : support) {
        const auto& rr = cols_.rows[static_cast<std::size_t>(j)];
        const auto& vv = cols_.vals[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < rr.size(); ++k) s[rr[k]] += vv[k] * d[j];
      }

      int enter = -1;
      double best_t = std::numeric_limits<double>::infinity();
      double best_s = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const auto& row = rows_[static_cast<std::size_t>(i)];
        if (s[i] <= 1e-9 * row.norm * dnorm || active_[static_cast<std::size_t>(i)]) continue;
        const double slack = std::max(0.0, slack_[i]);
        const double t = slack < 1e-11 * (1.0 + std::abs(lp_.bounds[i])) ? 0.0 : slack / s[i];
        const double tie = 1e-12 * (1.0 + best_t);
        bool take = false;
        if (enter < 0 || t < best_t - tie) {
          take = true;
        } else if (t <= best_t + tie) {
          // Ties: Bland takes the smallest row (already held, rows are scanned
          // in order); otherwise prefer the better conditioned pivot.
          take = !bland && s[i] / row.norm > best_s * (1.0 + 1e-9);
        }
        if (take) {
          enter = static_cast<int>(i);
          best_t = t;
          best_s = s[i] / row.norm;
        }
      }
      if (enter < 0) {
        sol.status = LpStatus::Unbounded;
        sol.iterations = iter;
        return sol;
      }

      degenerate_run = best_t * dnorm <= 1e-12 * (1.0 + x_.lpNorm<Eigen::Infinity>()) ? degenerate_run + 1 : 0;
      x_ += best_t * d;
      slack_ -= best_t * s;

      const auto& in_row = rows_[static_cast<std::size_t>(enter)];
      const double s_in = s[enter];
      RVector r = RVector::Zero(n_);
      for (std::size_t k = 0; k < in_row.cols.size(); ++k) r += in_row.vals[k] * binv_.row(in_row.cols[k]).transpose();
      r[leave] -= 1.0;
      binv_.noalias() -= (d / s_in) * r.transpose();

      active_[static_cast<std::size_t>(basis_[leave])] = 0;
      active_[static_cast<std::size_t>(enter)] = 1;
      basis_[leave] = enter;

      if (++since_refactor >= opt_.refactor_every) {
        since_refactor = 0;
        if (!refactor()) {
          sol.status = LpStatus::NumericalFailure;
          sol.iterations = iter + 1;
          return sol;
        }
      }
    }

    sol.iterations = iter;
    if (iter >= opt_.max_iterations || !refactor()) {
      sol.status = LpStatus::NumericalFailure;
      return sol;
    }
    sol.x = x_;
    sol.objective_value = lp_.objective.dot(x_);
    sol.basis = basis_;
    const double scale = 1.0 + lp_.bounds.lpNorm<Eigen::Infinity>();
    sol.status = lp_.feasibility_residual(x_) <= opt_.tol * scale ? LpStatus::Optimal : LpStatus::NumericalFailure;
    return sol;
  }

private:
  static constexpr int kDegenerateSwitch = 16;

  double start_tolerance() const { return 1e-7 * (1.0 + lp_.bounds.lpNorm<Eigen::Infinity>()); }

  bool refactor() {
    RMatrix b(n_, n_);
    RVector rhs(n_);
    for (Eigen::Index p = 0; p < n_; ++p) {
      b.row(p) = lp_.constraints.row(basis_[p]);
      rhs[p] = lp_.bounds[basis_[p]];
    }
    Eigen::PartialPivLU<RMatrix> lu(b);
    const double det_scale = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(det_scale > 1e-13 * (1.0 + lu.matrixLU().diagonal().cwiseAbs().maxCoeff()))) return false;
    binv_ = lu.inverse();
    x_ = lu.solve(rhs);
    slack_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) slack_[i] = lp_.bounds[i] - rows_[static_cast<std::size_t>(i)].dot(x_);
    dual_scale_ = 1.0 + lp_.objective.lpNorm<Eigen::Infinity>();
    return x_.allFinite();
  }

  const LinearProgram& lp_;
  LpOptions opt_;
  Eigen::Index m_;
  Eigen::Index n_;
  std::vector<SparseRow> rows_;
  SparseColumns cols_;
  std::vector<int> c_nonzero_;
  std::vector<int> basis_;
  std::vector<char> active_;
  RMatrix binv_;
  RVector x_;
  RVector slack_;
  double dual_scale_ = 1.0;
};

}  // namespace

LpSolution solve_from_vertex(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  return VertexSimplex(lp, options).run();
}

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
  if (!lp.start_basis.empty()) return solve_from_vertex(lp, options);
  return solve_tableau(lp, options);
}

void write_lp(std::ostream& out, const LinearProgram& lp) {
  lp.validate();
  const auto old_precision = out.precision(17);
  out << "max " << lp.num_vars() << '\n' << "c'";
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) out << ' ' << lp.objective[j];
  out << '\n' << "A " << lp.num_rows() << ' ' << lp.num_vars() << '\n';
  for (Eigen::Index i = 0; i < lp.num_rows(); ++i) {
    for (Eigen::Index j = 0; j < lp.num_vars(); ++j) out << lp.constraints(i, j) << ' ';
    out << "| " << lp.bounds[i] << '\n';
  }
  out << "end\n";
  out.precision(old_precision);
}

LinearProgram read_lp(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw std::runtime_error("read_lp: expected '" + word + "'");
  };
  LinearProgram lp;
  Eigen::Index n = 0;
  expect("max");
  in >> n;
  expect("c'");
  lp.objective.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) in >> lp.objective[j];
  Eigen::Index m = 0, n2 = 0;
  expect("A");
  in >> m >> n2;
  if (!in || n2 != n) throw std::runtime_error("read_lp: malformed dimensions");
  lp.constraints.resize(m, n);
  lp.bounds.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) in >> lp.constraints(i, j);
    expect("|");
    in >> lp.bounds[i];
  }
  expect("end");
  if (!in) throw std::runtime_error("read_lp: truncated input");
  return lp;
}

}  // namespace risbeam
