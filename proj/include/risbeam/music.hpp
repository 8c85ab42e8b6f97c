#pragma once

#include <cstdint>
#include <vector>

#include "risbeam/rng.hpp"
#include "risbeam/schedules.hpp"

namespace risbeam {

// Q received blocks; block q holds ybar_t = hbar^H w_t s + n_t for t = 1..T.
struct SnapshotSet {
  std::vector<CVector> blocks;
  cplx pilot{1.0, 0.0};
  double noise_var = 1.0;

  int slots() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().size()); }
};

// Noise-free block hbar(target)^H W s (as a length-T vector).
CVector noiseless_block(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                        const Angle& target, cplx pilot = {1.0, 0.0});

// Draws schedule.blocks noisy blocks with CN(0, gains.noise_var) noise.
SnapshotSet simulate_snapshots(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                               const Angle& target, Rng& rng, cplx pilot = {1.0, 0.0});

// S = (1/Q) sum_q ybar_q^H ybar_q with ybar_q a row vector.
CMatrix sample_covariance(const SnapshotSet& snapshots);

struct Eigenpairs {
  RVector values;   // descending
  CMatrix vectors;  // column k pairs with values[k]
};

Eigenpairs hermitian_eig(const CMatrix& s);

// Response b(theta) = W^H hbar(theta), length T.
CVector schedule_response(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                          const Angle& angle);

struct MusicSearch {
  double lo = -30.0;
  double hi = 30.0;
  double coarse_step = 0.01;  // degrees
  double accuracy = 1e-4;     // degrees

  void validate() const;
};

struct MusicSpectrum {
  std::vector<double> grid;    // coarse search angles
  std::vector<double> values;  // P(theta) on the grid
  double peak = 0.0;           // refined estimate
  double peak_value = 0.0;
  // False when the spectrum is flat over the search range, e.g. when every
  // slot uses the same weights and b(theta) points the same way everywhere.
  bool reliable = true;
};

// Single-source MUSIC over a fixed schedule. The coarse-grid responses are
// tabulated once, so one estimator can serve many trials. ULA only.
class MusicEstimator {
public:
  MusicEstimator(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                 MusicSearch search = {});

  MusicSpectrum spectrum(const CMatrix& covariance) const;
  const MusicSearch& search() const { return search_; }

private:
  double pseudo_power(const CMatrix& noise_basis, const CVector& b) const;

  ArrayGeometry geom_;
  ChannelGains gains_;
  RisSchedule schedule_;
  MusicSearch search_;
  std::vector<double> grid_;
  CMatrix table_;  // T x grid
};

MusicSpectrum music_spectrum(const CMatrix& covariance, const RisSchedule& schedule, const ArrayGeometry& geom,
                             const ChannelGains& gains, const MusicSearch& search = {});

struct MseConfig {
  ArrayGeometry geometry = ArrayGeometry::ula(64);
  Interval roi{-30.0, 30.0};
  std::vector<double> snr_db{-10.0, 0.0, 10.0};
  int trials = 200;
  double noise_var = 1.0;
  Angle bs_angle{};
  std::uint64_t seed = 1;
  MusicSearch search{};

  void validate() const;
};

struct MsePoint {
  double snr_db = 0.0;
  double mse_deg2 = 0.0;
  int trials = 0;
  int unreliable = 0;  // trials whose spectrum was flagged flat
};

// Per SNR: targets uniform in the ROI, one MUSIC estimate per trial, squared
// error averaged in degrees^2. Trial seeds come from derive_seed, so the
// result does not depend on the thread count.
std::vector<MsePoint> mse_experiment(const RisSchedule& schedule, const MseConfig& config);

}  // namespace risbeam
