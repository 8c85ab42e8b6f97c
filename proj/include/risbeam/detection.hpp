#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "risbeam/music.hpp"

namespace risbeam {

// Lambda' = Re(y^H mu_hat).
double glrt_statistic(const CVector& y, const CVector& mu_hat);
// V = sum_t |y_t|^2.
double energy_statistic(const CVector& y);

struct DetectionStatistics {
  double glrt_value = 0.0;
  double energy_value = 0.0;
  CVector mu_hat;
  double mu_norm_sq = 0.0;
};

DetectionStatistics detection_statistics(const CVector& y, const CVector& mu_hat);

struct GlrtClosedForm {
  double threshold = 0.0;  // eta'
  double p_d = 0.0;
};

// Lambda' is N(0, s ||mu||^2 / 2) under H0 and N(||mu||^2, s ||mu||^2 / 2)
// under H1 with s = sigma_sq. The threshold meets p_fa exactly and
// p_d = Q(Q^{-1}(p_fa) - sqrt(2) ||mu|| / sqrt(s)). With mu = 0, p_d = p_fa.
GlrtClosedForm glrt_closed_form(double mu_norm_sq, double p_fa, double sigma_sq = 1.0);

struct EnergyClosedForm {
  double p_fa = 0.0;
  double p_d = 0.0;
};

// (2 / sigma_sq) V is chi2(2T) under H0 and noncentral chi2(2T, 2 ||mu||^2 / sigma_sq) under H1.
EnergyClosedForm energy_closed_form(int slots, double sigma_sq, const CVector& mu, double gamma);
// gamma with closed-form p_fa equal to the target.
double energy_threshold(int slots, double sigma_sq, double p_fa);

enum class RocSource { MonteCarlo, ClosedForm };
const char* to_string(RocSource source);

struct RocPoint {
  double p_fa = 0.0;
  double p_d = 0.0;
  double threshold = 0.0;
  RocSource source = RocSource::MonteCarlo;
};

// Threshold at the H0 sample quantile for each target false-alarm rate;
// p_fa and p_d are the empirical exceedance fractions (statistic > threshold).
// Sorted by target, p_d never decreases.
std::vector<RocPoint> empirical_roc(std::span<const double> h0, std::span<const double> h1,
                                    std::span<const double> p_fa_targets);

//   Glrt:           mu_hat from the MUSIC estimate on the block itself,
//                   threshold Q^{-1}(p_fa) on the normalized statistic, i.e.
//                   eta' recomputed from each trial's mu_hat.
//   GlrtOracle:     mu from the true target angle, same threshold rule.
//   Energy:         V against the chi2(2T) threshold.
//   GlrtCalibrated: the Glrt statistic against thresholds taken from the
//                   empirical H0 quantiles.
enum class Detector { Glrt, GlrtOracle, Energy, GlrtCalibrated };
const char* to_string(Detector detector);

struct DetectionConfig {
  ArrayGeometry geometry = ArrayGeometry::ula(64);
  Interval roi{-30.0, 30.0};
  std::vector<double> snr_db{-15.0};
  int trials = 500;
  double noise_var = 1.0;
  Angle bs_angle{};
  std::uint64_t seed = 1;
  std::vector<double> p_fa_grid{0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  MusicSearch search{};

  void validate() const;
};

// Statistics of every trial. The GLRT entries hold the normalized
// Lambda' / sqrt(sigma^2 ||mu_hat||^2 / 2), so the per-trial threshold eta'
// becomes the single number Q^{-1}(p_fa). The energy entries hold V.
struct DetectionSamples {
  std::vector<double> h0[3];
  std::vector<double> h1[3];
  std::vector<double> true_mu_norm_sq;  // ||mu||^2 of each trial's target

  const std::vector<double>& null(Detector d) const { return h0[index(d)]; }
  const std::vector<double>& alt(Detector d) const { return h1[index(d)]; }

private:
  static int index(Detector d) { return d == Detector::GlrtCalibrated ? 0 : static_cast<int>(d); }
};

// Per trial: target uniform in the ROI and schedule.blocks (>= 2) noisy
// blocks under each hypothesis. The MUSIC estimate uses all blocks; every
// statistic is computed on the first block's T slots. Trial i uses the same
// seed for every SNR and schedule.
DetectionSamples detection_trials(const RisSchedule& schedule, const DetectionConfig& config, double snr_db);

struct RocRow {
  std::string detector;
  std::string schedule;
  double snr_db = 0.0;
  RocPoint point;
  int trials = 0;
};

// Monte Carlo ROC for each detector at each configured SNR, plus closed-form
// curves averaged over the trial targets for the oracle GLRT and the energy
// detector. Monte Carlo rows report the measured false-alarm fraction, which
// for Glrt exceeds the target because mu_hat is fitted to the data.
std::vector<RocRow> roc_experiment(const RisSchedule& schedule, const std::string& schedule_name,
                                   const DetectionConfig& config);

// Empirical P_D at one false-alarm target for every SNR and detector.
std::vector<RocRow> fixed_pfa_experiment(const RisSchedule& schedule, const std::string& schedule_name,
                                         const DetectionConfig& config, double p_fa);

}  // namespace risbeam
