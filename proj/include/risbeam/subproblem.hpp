#pragma once

#include <span>
#include <vector>

#include "risbeam/lp.hpp"
#include "risbeam/phase_constraints.hpp"

namespace risbeam {

// How the per-slot responses of a stacked multi-slot vector v = [w_1; ...; w_T]
// combine into received power at one angle.
//   Coherent:   |hbar^H (w_1 + ... + w_T)|^2   (tiled channel against v)
//   Incoherent: |hbar^H w_1|^2 + ... + |hbar^H w_T|^2
enum class SlotCombining { Coherent, Incoherent };

// Received power of v at one angle (penalty excluded). `hbar` has length N,
// `v` has length N * slots.
double slot_power(const CVector& hbar, const CVector& v, int slots, SlotCombining combining);

// f(v) = slot_power(v) + lambda * ||v||^2
double penalized_power(const CVector& hbar, const CVector& v, int slots, SlotCombining combining, double lambda);

// min over the columns of `table` of penalized_power.
double penalized_value(const CVector& v, const CMatrix& table, double lambda, int slots = 1,
                       SlotCombining combining = SlotCombining::Coherent);

// First-order minorizer of penalized_power at a reference point:
//   g(v) = constant + Re(sum_i coeff_i v_i)
struct SurrogateRow {
  double constant = 0.0;
  CVector coeff;

  double operator()(const CVector& v) const { return constant + (coeff.transpose() * v)(0).real(); }
};

SurrogateRow surrogate_row(const CVector& hbar, const CVector& v_ref, int slots, SlotCombining combining,
                           double lambda);
std::vector<SurrogateRow> surrogate_rows(const CMatrix& table, const CVector& v_ref, int slots,
                                         SlotCombining combining, double lambda);

// LP over x = [Re v_0, Im v_0, ..., Re v_{n-1}, Im v_{n-1}, T]:
//   rows [0, G):        T - (linear part of g_k) <= constant_k
//   rows G + e*H + h:   polygon half-plane h of element e
// objective: maximize T.
LinearProgram build_subproblem(std::span<const SurrogateRow> rows, const FeasibleRegion& region, int n_weights);

// Feasible starting vertex: every element snapped to its nearest polygon
// vertex, T pinned by the lowest surrogate row there.
std::vector<int> vertex_start_basis(std::span<const SurrogateRow> rows, const FeasibleRegion& region,
                                    const CVector& v_ref);

CVector weights_from_lp(const RVector& x, int n_weights);

}  // namespace risbeam
