#include "risbeam/detection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "risbeam/parallel.hpp"
#include "risbeam/special_functions.hpp"

namespace risbeam {

double glrt_statistic(const CVector& y, const CVector& mu_hat) {
  if (y.size() != mu_hat.size()) throw std::invalid_argument("glrt: y and mu_hat differ in length");
  return y.dot(mu_hat).real();  // Eigen's dot conjugates the first argument
}

double energy_statistic(const CVector& y) { return y.squaredNorm(); }

DetectionStatistics detection_statistics(const CVector& y, const CVector& mu_hat) {
  DetectionStatistics s;
  s.glrt_value = glrt_statistic(y, mu_hat);
  s.energy_value = energy_statistic(y);
  s.mu_hat = mu_hat;
  s.mu_norm_sq = mu_hat.squaredNorm();
  return s;
}

GlrtClosedForm glrt_closed_form(double mu_norm_sq, double p_fa, double sigma_sq) {
  if (!(mu_norm_sq >= 0.0)) throw std::invalid_argument("glrt: ||mu||^2 must be >= 0");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("glrt: noise variance must be > 0");
  const double qi = q_inverse(p_fa);
  GlrtClosedForm out;
  out.threshold = std::sqrt(0.5 * sigma_sq * mu_norm_sq) * qi;
  out.p_d = mu_norm_sq == 0.0 ? p_fa : q_function(qi - std::sqrt(2.0 * mu_norm_sq / sigma_sq));
  return out;
}

EnergyClosedForm energy_closed_form(int slots, double sigma_sq, const CVector& mu, double gamma) {
  if (slots < 1) throw std::invalid_argument("energy detector: slots must be >= 1");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("energy detector: noise variance must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("energy detector: threshold must be >= 0");
  if (mu.size() != slots) throw std::invalid_argument("energy detector: mean length must equal slots");
  const double dof = 2.0 * slots;
  const double x = 2.0 * gamma / sigma_sq;
  EnergyClosedForm out;
  out.p_fa = chi2_sf(dof, x);
  out.p_d = ncx2_sf(dof, 2.0 * mu.squaredNorm() / sigma_sq, x);
  return out;
}

double energy_threshold(int slots, double sigma_sq, double p_fa) {
  if (slots < 1) throw std::invalid_argument("energy detector: slots must be >= 1");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("energy detector: noise variance must be > 0");
  return 0.5 * sigma_sq * chi2_sf_inverse(2.0 * slots, p_fa);
}

const char* to_string(RocSource source) { return source == RocSource::MonteCarlo ? "montecarlo" : "closedform"; }

const char* to_string(Detector detector) {
  switch (detector) {
    case Detector::Glrt: return "glrt";
    case Detector::GlrtOracle: return "glrt_oracle";
    case Detector::Energy: return "energy";
    case Detector::GlrtCalibrated: return "glrt_calibrated";
  }
  return "?";
}

std::vector<RocPoint> empirical_roc(std::span<const double> h0, std::span<const double> h1,
                                    std::span<const double> p_fa_targets) {
  if (h0.empty() || h1.empty()) throw std::invalid_argument("roc: empty sample set");
  std::vector<double> null(h0.begin(), h0.end());
  std::vector<double> alt(h1.begin(), h1.end());
  std::sort(null.begin(), null.end(), std::greater<>());
  std::sort(alt.begin(), alt.end(), std::greater<>());
  auto exceed = [](const std::vector<double>& desc, double thr) {
    const auto it = std::lower_bound(desc.begin(), desc.end(), thr, std::greater<>());
    return static_cast<double>(it - desc.begin()) / static_cast<double>(desc.size());
  };

  std::vector<double> targets(p_fa_targets.begin(), p_fa_targets.end());
  std::sort(targets.begin(), targets.end());
  std::vector<RocPoint> out;
  for (double p : targets) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("roc: false-alarm targets must lie in [0, 1]");
    const auto allowed = static_cast<std::size_t>(std::floor(p * static_cast<double>(null.size()) + 1e-9));
    RocPoint pt;
    pt.threshold = allowed < null.size() ? null[allowed] : -std::numeric_limits<double>::infinity();
    pt.p_fa = exceed(null, pt.threshold);
    pt.p_d = exceed(alt, pt.threshold);
    out.push_back(pt);
  }
  return out;
}

void DetectionConfig::validate() const {
  geometry.validate();
  if (geometry.kind != ArrayKind::Ula) throw std::invalid_argument("detection: only ULA geometries are supported");
  if (roi.lo > roi.hi) throw std::invalid_argument("roi: min exceeds max");
  if (roi.lo < -90.0 || roi.hi > 90.0) throw std::invalid_argument("roi: bounds must lie in [-90, 90]");
  if (snr_db.empty()) throw std::invalid_argument("snr list must not be empty");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  if (p_fa_grid.empty()) throw std::invalid_argument("false-alarm grid must not be empty");
  search.validate();
}

DetectionSamples detection_trials(const RisSchedule& schedule, const DetectionConfig& config, double snr_db) {
  config.validate();
  if (schedule.blocks < 2) throw std::invalid_argument("detection: the MUSIC estimate needs at least 2 blocks");
  const ChannelGains gains = gains_for_snr(config.geometry, snr_db, config.noise_var, config.bs_angle);
  MusicSearch search = config.search;
  search.lo = config.roi.lo;
  search.hi = config.roi.hi;
  const MusicEstimator estimator(config.geometry, gains, schedule, search);

  const auto n = static_cast<std::size_t>(config.trials);
  DetectionSamples out;
  for (int d = 0; d < 3; ++d) {
    out.h0[d].resize(n);
    out.h1[d].resize(n);
  }
  out.true_mu_norm_sq.resize(n);
  const double sigma_sq = config.noise_var;
  auto normalized = [&](const CVector& y, const CVector& mu) {
    const double scale = std::sqrt(0.5 * sigma_sq * mu.squaredNorm());
    return scale > 0.0 ? glrt_statistic(y, mu) / scale : 0.0;
  };
  auto music_mu = [&](const SnapshotSet& snaps) {
    const double theta = estimator.spectrum(sample_covariance(snaps)).peak;
    return noiseless_block(config.geometry, gains, schedule, {theta, 0.0});
  };

  const auto stream = stream_id("detection");
  parallel_for(config.trials, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    Rng rng(derive_seed(config.seed, stream, static_cast<std::uint64_t>(i)));
    const double theta = rng.uniform(config.roi.lo, config.roi.hi);
    const CVector mu = noiseless_block(config.geometry, gains, schedule, {theta, 0.0});
    const SnapshotSet null_snaps = simulate_snapshots(config.geometry, gains, schedule, {theta, 0.0}, rng);
    SnapshotSet signal_snaps = simulate_snapshots(config.geometry, gains, schedule, {theta, 0.0}, rng);
    SnapshotSet noise_snaps = null_snaps;
    for (auto& b : noise_snaps.blocks) b -= mu;
    // Both detectors decide on the first block; MUSIC sees all blocks.
    const CVector& y0 = noise_snaps.blocks.front();
    const CVector& y1 = signal_snaps.blocks.front();

    out.true_mu_norm_sq[k] = mu.squaredNorm();
    out.h0[static_cast<int>(Detector::Glrt)][k] = normalized(y0, music_mu(noise_snaps));
    out.h1[static_cast<int>(Detector::Glrt)][k] = normalized(y1, music_mu(signal_snaps));
    out.h0[static_cast<int>(Detector::GlrtOracle)][k] = normalized(y0, mu);
    out.h1[static_cast<int>(Detector::GlrtOracle)][k] = normalized(y1, mu);
    out.h0[static_cast<int>(Detector::Energy)][k] = energy_statistic(y0);
    out.h1[static_cast<int>(Detector::Energy)][k] = energy_statistic(y1);
  });
  return out;
}

namespace {

RocPoint threshold_point(std::span<const double> h0, std::span<const double> h1, double threshold) {
  if (h0.empty() || h1.empty()) throw std::invalid_argument("roc: empty sample set");
  auto exceed = [&](std::span<const double> v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x > threshold; })) /
           static_cast<double>(v.size());
  };
  return {exceed(h0), exceed(h1), threshold, RocSource::MonteCarlo};
}

double analytic_threshold(Detector detector, int slots, double sigma_sq, double p_fa) {
  if (!(p_fa >= 0.0 && p_fa <= 1.0)) throw std::invalid_argument("roc: false-alarm targets must lie in [0, 1]");
  if (p_fa <= 0.0) return std::numeric_limits<double>::infinity();
  if (p_fa >= 1.0) return -std::numeric_limits<double>::infinity();
  if (detector == Detector::Energy) return energy_threshold(slots, sigma_sq, p_fa);
  return q_inverse(p_fa);
}

}  // namespace

std::vector<RocRow> roc_experiment(const RisSchedule& schedule, const std::string& schedule_name,
                                   const DetectionConfig& config) {
  config.validate();
  std::vector<RocRow> rows;
  const int slots = schedule.slots();
  std::vector<double> targets = config.p_fa_grid;
  std::sort(targets.begin(), targets.end());
  for (double snr : config.snr_db) {
    const DetectionSamples samples = detection_trials(schedule, config, snr);
    for (Detector d : {Detector::Glrt, Detector::GlrtOracle, Detector::Energy}) {
      for (double p : targets) {
        const double thr = analytic_threshold(d, slots, config.noise_var, p);
        rows.push_back({to_string(d), schedule_name, snr, threshold_point(samples.null(d), samples.alt(d), thr),
                        config.trials});
      }
    }
    for (const auto& pt : empirical_roc(samples.null(Detector::Glrt), samples.alt(Detector::Glrt), targets))
      rows.push_back({to_string(Detector::GlrtCalibrated), schedule_name, snr, pt, config.trials});

    for (double p : targets) {
      if (p <= 0.0 || p >= 1.0) continue;
      RocPoint oracle{p, 0.0, q_inverse(p), RocSource::ClosedForm};
      RocPoint energy{p, 0.0, energy_threshold(slots, config.noise_var, p), RocSource::ClosedForm};
      for (double m : samples.true_mu_norm_sq) {
        oracle.p_d += glrt_closed_form(m, p, config.noise_var).p_d;
        energy.p_d += ncx2_sf(2.0 * slots, 2.0 * m / config.noise_var, 2.0 * energy.threshold / config.noise_var);
      }
      oracle.p_d /= config.trials;
      energy.p_d /= config.trials;
      rows.push_back({to_string(Detector::GlrtOracle), schedule_name, snr, oracle, config.trials});
      rows.push_back({to_string(Detector::Energy), schedule_name, snr, energy, config.trials});
    }
  }
  return rows;
}

std::vector<RocRow> fixed_pfa_experiment(const RisSchedule& schedule, const std::string& schedule_name,
                                         const DetectionConfig& config, double p_fa) {
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("fixed p_fa must lie in (0, 1)");
  DetectionConfig c = config;
  c.p_fa_grid = {p_fa};
  return roc_experiment(schedule, schedule_name, c);
}

}  // namespace risbeam
