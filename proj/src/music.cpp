#include "risbeam/music.hpp"

#include <algorithm>
#include <cmath>

#include "risbeam/parallel.hpp"

namespace risbeam {

CVector noiseless_block(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                        const Angle& target, cplx pilot) {
  if (schedule.size() != geom.size()) throw std::invalid_argument("schedule: element count does not match geometry");
  const CVector h = effective_channel(geom, gains, target);
  // ybar = h^H W s as a column: (W^T conj(h)) s
  return (schedule.weights.transpose() * h.conjugate()) * pilot;
}

SnapshotSet simulate_snapshots(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                               const Angle& target, Rng& rng, cplx pilot) {
  gains.validate();
  const CVector clean = noiseless_block(geom, gains, schedule, target, pilot);
  SnapshotSet out;
  out.pilot = pilot;
  out.noise_var = gains.noise_var;
  for (int q = 0; q < schedule.blocks; ++q) {
    CVector y = clean;
    for (Eigen::Index t = 0; t < y.size(); ++t) y[t] += rng.complex_normal(gains.noise_var);
    out.blocks.push_back(std::move(y));
  }
  return out;
}

CMatrix sample_covariance(const SnapshotSet& snapshots) {
  if (snapshots.blocks.empty()) throw std::invalid_argument("sample covariance: no blocks");
  const Eigen::Index t = snapshots.blocks.front().size();
  CMatrix s = CMatrix::Zero(t, t);
  for (const auto& y : snapshots.blocks) {
    if (y.size() != t) throw std::invalid_argument("sample covariance: blocks differ in length");
    s.noalias() += y.conjugate() * y.transpose();
  }
  s /= static_cast<double>(snapshots.blocks.size());
  return 0.5 * (s + s.adjoint());
}

Eigenpairs hermitian_eig(const CMatrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) throw std::invalid_argument("eigendecomposition: matrix must be square");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(s);
  if (solver.info() != Eigen::Success) throw NumericalError("aoa-music", 0, "Hermitian eigendecomposition failed");
  const Eigen::Index n = s.rows();
  Eigenpairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = solver.eigenvalues()[n - 1 - k];
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

CVector schedule_response(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                          const Angle& angle) {
  if (schedule.size() != geom.size()) throw std::invalid_argument("schedule: element count does not match geometry");
  return schedule.weights.adjoint() * effective_channel(geom, gains, angle);
}

void MusicSearch::validate() const {
  if (!(lo <= hi)) throw std::invalid_argument("music search: lo exceeds hi");
  if (lo < -90.0 || hi > 90.0) throw std::invalid_argument("music search: range must lie in [-90, 90]");
  if (!(coarse_step > 0.0)) throw std::invalid_argument("music search: coarse step must be > 0");
  if (!(accuracy > 0.0)) throw std::invalid_argument("music search: accuracy must be > 0");
}

MusicEstimator::MusicEstimator(const ArrayGeometry& geom, const ChannelGains& gains, const RisSchedule& schedule,
                               MusicSearch search)
    : geom_(geom), gains_(gains), schedule_(schedule), search_(search) {
  if (geom.kind != ArrayKind::Ula) throw std::invalid_argument("music: only ULA geometries are supported");
  schedule.validate();
  search.validate();
  if (schedule.size() != geom.size()) throw std::invalid_argument("schedule: element count does not match geometry");
  const auto count = static_cast<long>(std::ceil((search.hi - search.lo) / search.coarse_step - 1e-9));
  for (long i = 0; i <= count; ++i)
    grid_.push_back(i == count ? search.hi : search.lo + (search.hi - search.lo) * i / std::max(count, 1L));
  table_.resize(schedule.slots(), static_cast<Eigen::Index>(grid_.size()));
  parallel_for(static_cast<std::ptrdiff_t>(grid_.size()), [&](std::ptrdiff_t k) {
    table_.col(k) = schedule_response(geom_, gains_, schedule_, {grid_[static_cast<std::size_t>(k)], 0.0});
  });
}

double MusicEstimator::pseudo_power(const CMatrix& noise_basis, const CVector& b) const {
  const double num = b.squaredNorm();
  if (num == 0.0) return 0.0;
  const double den = (noise_basis.adjoint() * b).squaredNorm();
  return num / std::max(den, 1e-300 * num);
}

MusicSpectrum MusicEstimator::spectrum(const CMatrix& covariance) const {
  const Eigen::Index t = schedule_.slots();
  if (covariance.rows() != t || covariance.cols() != t)
    throw std::invalid_argument("music: covariance size does not match the schedule's slot count");
  const Eigenpairs eig = hermitian_eig(covariance);
  const CMatrix noise = eig.vectors.rightCols(t - 1);

  MusicSpectrum out;
  out.grid = grid_;
  out.values.resize(grid_.size());
  const CMatrix proj = noise.adjoint() * table_;
  std::size_t best = 0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const double num = table_.col(col).squaredNorm();
    const double den = proj.col(col).squaredNorm();
    out.values[k] = num == 0.0 ? 0.0 : num / std::max(den, 1e-300 * num);
    if (out.values[k] > out.values[best]) best = k;
  }
  const auto [lo_it, hi_it] = std::minmax_element(out.values.begin(), out.values.end());
  out.reliable = *hi_it > *lo_it * (1.0 + 1e-9);

  auto p = [&](double theta) {
    return pseudo_power(noise, schedule_response(geom_, gains_, schedule_, {theta, 0.0}));
  };
  double a = grid_[best == 0 ? 0 : best - 1];
  double b = grid_[std::min(best + 1, grid_.size() - 1)];
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = p(x1);
  double f2 = p(x2);
  while (b - a > search_.accuracy) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = p(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = p(x1);
    }
  }
  const double mid = 0.5 * (a + b);
  const double f_mid = p(mid);
  out.peak = grid_[best];
  out.peak_value = out.values[best];
  if (f_mid >= out.peak_value) {
    out.peak = mid;
    out.peak_value = f_mid;
  }
  return out;
}

MusicSpectrum music_spectrum(const CMatrix& covariance, const RisSchedule& schedule, const ArrayGeometry& geom,
                             const ChannelGains& gains, const MusicSearch& search) {
  return MusicEstimator(geom, gains, schedule, search).spectrum(covariance);
}

void MseConfig::validate() const {
  geometry.validate();
  if (roi.lo > roi.hi) throw std::invalid_argument("roi: min exceeds max");
  if (roi.lo < -90.0 || roi.hi > 90.0) throw std::invalid_argument("roi: bounds must lie in [-90, 90]");
  if (snr_db.empty()) throw std::invalid_argument("snr list must not be empty");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  search.validate();
}

std::vector<MsePoint> mse_experiment(const RisSchedule& schedule, const MseConfig& config) {
  config.validate();
  MusicSearch search = config.search;
  search.lo = config.roi.lo;
  search.hi = config.roi.hi;
  // The pseudo-spectrum is invariant to the gain scale, so one estimator
  // serves every SNR.
  const MusicEstimator estimator(config.geometry, gains_for_snr(config.geometry, 0.0, config.noise_var, config.bs_angle),
                                 schedule, search);
  const auto stream = stream_id("music_mse");
  std::vector<MsePoint> out;
  for (double snr : config.snr_db) {
    const ChannelGains gains = gains_for_snr(config.geometry, snr, config.noise_var, config.bs_angle);
    std::vector<double> err2(static_cast<std::size_t>(config.trials));
    std::vector<char> flat(static_cast<std::size_t>(config.trials));
    // Trial i uses the same seed at every SNR, so curves differ only by the
    // signal level.
    parallel_for(config.trials, [&](std::ptrdiff_t i) {
      Rng rng(derive_seed(config.seed, stream, static_cast<std::uint64_t>(i)));
      const double theta = rng.uniform(config.roi.lo, config.roi.hi);
      const auto snaps = simulate_snapshots(config.geometry, gains, schedule, {theta, 0.0}, rng);
      const auto spec = estimator.spectrum(sample_covariance(snaps));
      err2[static_cast<std::size_t>(i)] = (spec.peak - theta) * (spec.peak - theta);
      flat[static_cast<std::size_t>(i)] = spec.reliable ? 0 : 1;
    });
    MsePoint pt;
    pt.snr_db = snr;
    pt.trials = config.trials;
    for (std::size_t i = 0; i < err2.size(); ++i) {
      pt.mse_deg2 += err2[i];
      pt.unreliable += flat[i];
    }
    pt.mse_deg2 /= config.trials;
    out.push_back(pt);
  }
  return out;
}

}  // namespace risbeam
