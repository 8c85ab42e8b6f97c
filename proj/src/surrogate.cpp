#include <limits>

#include "risbeam/subproblem.hpp"

namespace risbeam {

namespace {

void check_dims(const CVector& hbar, const CVector& v, int slots) {
  if (slots < 1) throw std::invalid_argument("slots must be >= 1");
  if (v.size() != hbar.size() * slots) throw std::invalid_argument("weight length must be N * slots");
}

}  // namespace

double slot_power(const CVector& hbar, const CVector& v, int slots, SlotCombining combining) {
  check_dims(hbar, v, slots);
  const Eigen::Index n = hbar.size();
  if (combining == SlotCombining::Coherent) {
    cplx z{0.0, 0.0};
    for (int t = 0; t < slots; ++t) z += hbar.dot(v.segment(t * n, n));
    return std::norm(z);
  }
  double p = 0.0;
  for (int t = 0; t < slots; ++t) p += std::norm(hbar.dot(v.segment(t * n, n)));
  return p;
}

double penalized_power(const CVector& hbar, const CVector& v, int slots, SlotCombining combining, double lambda) {
  return slot_power(hbar, v, slots, combining) + lambda * v.squaredNorm();
}

double penalized_value(const CVector& v, const CMatrix& table, double lambda, int slots, SlotCombining combining) {
  if (table.cols() == 0) throw std::invalid_argument("penalized_value: empty grid");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < table.cols(); ++k)
    best = std::min(best, penalized_power(table.col(k), v, slots, combining, lambda));
  return best;
}

SurrogateRow surrogate_row(const CVector& hbar, const CVector& v_ref, int slots, SlotCombining combining,
                           double lambda) {
  check_dims(hbar, v_ref, slots);
  const Eigen::Index n = hbar.size();
  SurrogateRow row;
  row.coeff.resize(v_ref.size());

  // |z|^2 >= |z0|^2 + 2 Re(conj(z0) (z - z0)) with z = hbar^H w, i.e. the
  // linear part 2 Re(conj(z0 hbar_i) w_i) and constant -|z0|^2.
  std::vector<cplx> z(static_cast<std::size_t>(slots));
  if (combining == SlotCombining::Coherent) {
    cplx total{0.0, 0.0};
    for (int t = 0; t < slots; ++t) total += hbar.dot(v_ref.segment(t * n, n));
    std::fill(z.begin(), z.end(), total);
    row.constant = -std::norm(total);
  } else {
    for (int t = 0; t < slots; ++t) {
      z[static_cast<std::size_t>(t)] = hbar.dot(v_ref.segment(t * n, n));
      row.constant -= std::norm(z[static_cast<std::size_t>(t)]);
    }
  }
  for (int t = 0; t < slots; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      row.coeff[t * n + i] = 2.0 * std::conj(z[static_cast<std::size_t>(t)] * hbar[i]) +
                             2.0 * lambda * std::conj(v_ref[t * n + i]);
  row.constant -= lambda * v_ref.squaredNorm();
  return row;
}

std::vector<SurrogateRow> surrogate_rows(const CMatrix& table, const CVector& v_ref, int slots,
                                         SlotCombining combining, double lambda) {
  std::vector<SurrogateRow> rows;
  rows.reserve(static_cast<std::size_t>(table.cols()));
  for (Eigen::Index k = 0; k < table.cols(); ++k)
    rows.push_back(surrogate_row(table.col(k), v_ref, slots, combining, lambda));
  return rows;
}

LinearProgram build_subproblem(std::span<const SurrogateRow> rows, const FeasibleRegion& region, int n_weights) {
  if (rows.empty()) throw std::invalid_argument("build_subproblem: empty angle grid");
  if (n_weights < 1) throw std::invalid_argument("build_subproblem: no weights");
  if (region.halfplanes.empty()) throw std::invalid_argument("build_subproblem: empty feasible region");
  const Eigen::Index g = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index h = static_cast<Eigen::Index>(region.halfplanes.size());
  const Eigen::Index n_vars = 2 * n_weights + 1;
  const Eigen::Index t_col = n_vars - 1;

  LinearProgram lp;
  lp.objective = RVector::Zero(n_vars);
  lp.objective[t_col] = 1.0;
  lp.constraints = RMatrix::Zero(g + h * n_weights, n_vars);
  lp.bounds.resize(lp.constraints.rows());

  for (Eigen::Index k = 0; k < g; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    if (r.coeff.size() != n_weights) throw std::invalid_argument("build_subproblem: surrogate row length mismatch");
    for (Eigen::Index i = 0; i < n_weights; ++i) {
      // Re(c w) = Re(c) Re(w) - Im(c) Im(w)
      lp.constraints(k, 2 * i) = -r.coeff[i].real();
      lp.constraints(k, 2 * i + 1) = r.coeff[i].imag();
    }
    lp.constraints(k, t_col) = 1.0;
    lp.bounds[k] = r.constant;
  }
  for (Eigen::Index e = 0; e < n_weights; ++e) {
    for (Eigen::Index p = 0; p < h; ++p) {
      const auto& hp = region.halfplanes[static_cast<std::size_t>(p)];
      const Eigen::Index row = g + e * h + p;
      lp.constraints(row, 2 * e) = hp.normal.real();
      lp.constraints(row, 2 * e + 1) = hp.normal.imag();
      lp.bounds[row] = hp.offset;
    }
  }

  lp.labels.reserve(static_cast<std::size_t>(n_vars));
  for (Eigen::Index i = 0; i < n_weights; ++i) {
    lp.labels.push_back("re_w" + std::to_string(i));
    lp.labels.push_back("im_w" + std::to_string(i));
  }
  lp.labels.push_back("T");
  return lp;
}

std::vector<int> vertex_start_basis(std::span<const SurrogateRow> rows, const FeasibleRegion& region,
                                    const CVector& v_ref) {
  const int g = static_cast<int>(rows.size());
  const int h = static_cast<int>(region.halfplanes.size());
  std::vector<int> basis;
  basis.reserve(static_cast<std::size_t>(2 * v_ref.size() + 1));
  CVector snapped(v_ref.size());
  for (Eigen::Index e = 0; e < v_ref.size(); ++e) {
    const cplx w = v_ref[e] == cplx{0.0, 0.0} ? cplx{1.0, 0.0} : v_ref[e];
    const auto& vert = region.nearest_vertex(w);
    snapped[e] = vert.point;
    basis.push_back(g + static_cast<int>(e) * h + vert.edge_a);
    basis.push_back(g + static_cast<int>(e) * h + vert.edge_b);
  }
  int lowest = 0;
  double lowest_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g; ++k) {
    const double v = rows[static_cast<std::size_t>(k)](snapped);
    if (v < lowest_value) {
      lowest_value = v;
      lowest = k;
    }
  }
  basis.push_back(lowest);
  return basis;
}

CVector weights_from_lp(const RVector& x, int n_weights) {
  if (x.size() != 2 * n_weights + 1) throw std::invalid_argument("weights_from_lp: solution length mismatch");
  CVector w(n_weights);
  for (int i = 0; i < n_weights; ++i) w[i] = cplx{x[2 * i], x[2 * i + 1]};
  return w;
}

}  // namespace risbeam
