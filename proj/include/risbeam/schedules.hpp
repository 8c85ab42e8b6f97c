#pragma once

#include <cstdint>

#include "risbeam/mm_synthesizer.hpp"

namespace risbeam {

// Per-slot surface configurations. Column t of `weights` is the weight
// vector of slot t; the whole schedule is repeated over `blocks` blocks.
struct RisSchedule {
  CMatrix weights;
  int blocks = 4;

  int size() const { return static_cast<int>(weights.rows()); }
  int slots() const { return static_cast<int>(weights.cols()); }
  // Throws unless slots >= 2, blocks >= 1 and every entry is finite with
  // modulus <= 1 + tol.
  void validate(double tol = 1e-8) const;
};

// T narrow beams on centers lo + t (hi - lo) / (T - 1); slot t holds the
// matched weights exp(j arg hbar_i(center_t)) projected onto the alphabet.
// levels <= 0 keeps the unquantized unit-modulus weights.
RisSchedule sweep_baseline_schedule(const ArrayGeometry& geom, const ChannelGains& gains, int levels,
                                    const Interval& roi, int slots, int blocks = 4);

// Beam centers used by sweep_baseline_schedule.
std::vector<double> sweep_centers(const Interval& roi, int slots);

// T wide beams from independent mm_solve runs on `base`, slot t using
// lambda_t = 10^(-1 + 3 t / (T - 1)) (0.1 ... 100) and seed base.seed + t.
// Slot weights are the projected solutions.
RisSchedule widebeam_schedule(const SynthesisProblem& base, int slots, int blocks = 4);

std::vector<double> widebeam_lambdas(int slots);

}  // namespace risbeam
