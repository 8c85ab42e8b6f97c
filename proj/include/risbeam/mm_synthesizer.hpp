#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "risbeam/array_model.hpp"
#include "risbeam/phase_constraints.hpp"
#include "risbeam/subproblem.hpp"

namespace risbeam {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Elevation x azimuth rectangle, degrees.
struct Rectangle {
  Interval el;
  Interval az;
};

// ULA: union of theta intervals. UPA: union of (elevation, azimuth) rectangles.
struct RegionOfInterest {
  std::vector<Interval> intervals;
  std::vector<Rectangle> rects;

  // "lo:hi[,lo:hi...]" (ULA form).
  static RegionOfInterest parse(const std::string& text);
  // "el_lo:el_hi/az_lo:az_hi[,...]" (UPA form).
  static RegionOfInterest parse_rects(const std::string& text);

  // Throws std::invalid_argument with an "roi: ..." message.
  void validate(ArrayKind kind) const;
  // Sorted, overlapping intervals merged.
  RegionOfInterest normalized() const;
  bool contains(double theta) const;
};

// Grid spacing used when none is given: the -0.5 dB beamwidth of an n-element
// array, capped at 0.1 degrees.
double default_grid_step(int n);

// Every interval contributes both endpoints and a uniform spacing <= step.
// UPA rectangles become tensor grids with `step` on elevation and `az_step`
// on azimuth.
std::vector<Angle> make_grid(const RegionOfInterest& roi, double step, double az_step = 0.0);

struct SynthesisProblem {
  ArrayGeometry geometry = ArrayGeometry::ula(16);
  ChannelGains gains{};
  RegionOfInterest roi{{{-30.0, 30.0}}, {}};
  double grid_step = 0.0;     // 0 selects default_grid_step
  double az_step = 0.0;       // UPA only; 0 selects the default for the azimuth axis
  double eval_step = 0.0;     // 0 selects grid_step / 10 (ULA) or grid_step / 2 (UPA)
  ConstraintMode mode = ConstraintMode::Discrete;
  int levels = 4;
  // Penalty weight, in units of single-element received power |alpha beta|^2 / N^2.
  double lambda = 0.0;
  // Approach lambda through 0, lambda/100, lambda/10; each stage runs until
  // its gain drops below epsilon. Without the ramp a large lambda freezes the
  // iterates at the random start vertex.
  bool penalty_ramp = true;
  int slots = 1;
  SlotCombining combining = SlotCombining::Coherent;
  double epsilon = 1e-4;
  int max_iters = 200;
  std::uint64_t seed = 1;
  LpOptions lp{};
  // Called with every subproblem before it is solved (iteration, program).
  std::function<void(int, const LinearProgram&)> on_subproblem;

  void validate() const;
  double effective_grid_step() const;
  double effective_az_step() const;
  double effective_eval_step() const;
  int num_weights() const { return geometry.size() * slots; }
};

struct SynthesisResult {
  CVector weights;                 // relaxed MM output, length N * slots
  CVector weights_projected;       // after the mode's projection
  std::vector<int> projected_index;  // alphabet index per element (discrete mode only)
  // Penalized objective per iteration in single-element power units, entry 0
  // is the start point. Non-decreasing; steps up where the ramp raises lambda.
  std::vector<double> t_trace;
  double min_power_relaxed = 0.0;  // linear, over the evaluation grid
  double min_power_projected = 0.0;
  int iterations = 0;
  int lp_pivots = 0;
  bool converged = false;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Penalized MM with LP subproblems. Throws NumericalError("subproblem-lp", k)
// when the k-th subproblem fails.
SynthesisResult mm_solve(const SynthesisProblem& problem);

// Power-mode synthesis (lambda = 0) followed by elementwise discrete projection.
SynthesisResult direct_quantize_baseline(const SynthesisProblem& problem);

// Runs mm_solve for every lambda and `restarts` seeds (seed, seed + 1, ...)
// and keeps the run with the largest projected minimum power.
SynthesisResult solve_lambda_sweep(const SynthesisProblem& problem, const std::vector<double>& lambdas,
                                   int restarts = 1);

inline const std::vector<double>& default_lambda_sweep() {
  static const std::vector<double> sweep{0.0, 0.1, 1.0, 10.0, 100.0};
  return sweep;
}

struct Flatness {
  double min_db = 0.0;
  double max_db = 0.0;
  double ripple_db = 0.0;
};

// Received power (penalty excluded) of `weights` over the problem's ROI
// sampled at `eval_step`.
RVector roi_power(const SynthesisProblem& problem, const CVector& weights, double eval_step);
Flatness evaluate_flatness(const SynthesisProblem& problem, const CVector& weights, double eval_step);

}  // namespace risbeam
