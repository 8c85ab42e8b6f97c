#include "risbeam/schedules.hpp"

#include <cmath>

#include "risbeam/parallel.hpp"

namespace risbeam {

void RisSchedule::validate(double tol) const {
  if (weights.cols() < 2) throw std::invalid_argument("schedule: at least 2 slots are required");
  if (weights.rows() < 1) throw std::invalid_argument("schedule: no elements");
  if (blocks < 1) throw std::invalid_argument("schedule: blocks must be >= 1");
  if (!weights.allFinite()) throw std::invalid_argument("schedule: non-finite weight");
  if (weights.cwiseAbs().maxCoeff() > 1.0 + tol) throw std::invalid_argument("schedule: weight outside the unit disc");
}

std::vector<double> sweep_centers(const Interval& roi, int slots) {
  if (slots < 1) throw std::invalid_argument("sweep: slots must be >= 1");
  if (roi.lo > roi.hi) throw std::invalid_argument("roi: min exceeds max");
  std::vector<double> centers;
  for (int t = 0; t < slots; ++t)
    centers.push_back(slots == 1 ? 0.5 * (roi.lo + roi.hi) : roi.lo + t * (roi.hi - roi.lo) / (slots - 1));
  return centers;
}

RisSchedule sweep_baseline_schedule(const ArrayGeometry& geom, const ChannelGains& gains, int levels,
                                    const Interval& roi, int slots, int blocks) {
  const auto centers = sweep_centers(roi, slots);
  const PhaseAlphabet alph = levels > 0 ? alphabet(levels) : PhaseAlphabet{};
  RisSchedule s;
  s.blocks = blocks;
  s.weights.resize(geom.size(), slots);
  for (int t = 0; t < slots; ++t) {
    const CVector h = effective_channel(geom, gains, {centers[static_cast<std::size_t>(t)], 0.0});
    for (int i = 0; i < geom.size(); ++i) {
      const cplx w = std::polar(1.0, std::arg(h[i]));
      s.weights(i, t) = levels > 0 ? project_discrete(w, alph) : w;
    }
  }
  s.validate();
  return s;
}

std::vector<double> widebeam_lambdas(int slots) {
  if (slots < 1) throw std::invalid_argument("schedule: slots must be >= 1");
  std::vector<double> out;
  for (int t = 0; t < slots; ++t) out.push_back(slots == 1 ? 1.0 : std::pow(10.0, -1.0 + 3.0 * t / (slots - 1)));
  return out;
}

RisSchedule widebeam_schedule(const SynthesisProblem& base, int slots, int blocks) {
  if (base.slots != 1) throw std::invalid_argument("schedule: the base problem must be single-slot");
  const auto lambdas = widebeam_lambdas(slots);
  std::vector<CVector> columns(static_cast<std::size_t>(slots));
  parallel_for(slots, [&](std::ptrdiff_t t) {
    SynthesisProblem p = base;
    p.lambda = lambdas[static_cast<std::size_t>(t)];
    p.seed = base.seed + static_cast<std::uint64_t>(t);
    columns[static_cast<std::size_t>(t)] = mm_solve(p).weights_projected;
  });
  RisSchedule s;
  s.blocks = blocks;
  s.weights.resize(base.num_weights(), slots);
  for (int t = 0; t < slots; ++t) s.weights.col(t) = columns[static_cast<std::size_t>(t)];
  s.validate();
  return s;
}

}  // namespace risbeam
