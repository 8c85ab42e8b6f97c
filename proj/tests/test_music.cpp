#include <doctest.h>

#ifdef RISBEAM_HAS_OPENMP
#include <omp.h>
#endif

#include "risbeam/music.hpp"
#include "test_helpers.hpp"

using namespace risbeam;

namespace {

RisSchedule random_schedule(Rng& rng, int n, int slots, int blocks = 4) {
  RisSchedule s;
  s.blocks = blocks;
  s.weights.resize(n, slots);
  for (int t = 0; t < slots; ++t) s.weights.col(t) = testing::random_phases(rng, n);
  return s;
}

SnapshotSet noiseless(const ArrayGeometry& g, const ChannelGains& gains, const RisSchedule& s, double theta) {
  SnapshotSet snaps;
  for (int q = 0; q < s.blocks; ++q) snaps.blocks.push_back(noiseless_block(g, gains, s, {theta, 0.0}));
  return snaps;
}

}  // namespace

TEST_CASE("sample covariance is Hermitian with a consistent eigendecomposition") {
  Rng rng(71);
  const auto g = ArrayGeometry::ula(16);
  const auto s = random_schedule(rng, 16, 7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto snaps = simulate_snapshots(g, gains_for_snr(g, 0.0), s, {rng.uniform(-30, 30), 0.0}, rng);
    const CMatrix cov = sample_covariance(snaps);
    CHECK((cov - cov.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigenpairs e = hermitian_eig(cov);
    for (Eigen::Index k = 0; k < e.values.size(); ++k) {
      CHECK(e.values[k] >= -1e-10);
      if (k > 0) CHECK(e.values[k] <= e.values[k - 1]);
    }
    CHECK(e.values.sum() == doctest::Approx(cov.trace().real()).epsilon(1e-10));
    const CMatrix rebuilt = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    CHECK((rebuilt - cov).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("sample covariance averages conj(y) y^T over blocks") {
  SnapshotSet snaps;
  CVector a(2), b(2);
  a << cplx(1, 1), cplx(0, 2);
  b << cplx(-1, 0), cplx(3, -1);
  snaps.blocks = {a, b};
  const CMatrix s = sample_covariance(snaps);
  const CMatrix expect = 0.5 * (a.conjugate() * a.transpose() + b.conjugate() * b.transpose());
  CHECK((s - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("noiseless data recover the true angle") {
  Rng rng(73);
  const auto g = ArrayGeometry::ula(16);
  const auto s = random_schedule(rng, 16, 7);
  const MusicEstimator est(g, {}, s, {});
  for (int trial = 0; trial < 100; ++trial) {
    const double theta = rng.uniform(-30, 30);
    const auto spec = est.spectrum(sample_covariance(noiseless(g, {}, s, theta)));
    CHECK(spec.reliable);
    CHECK(std::abs(spec.peak - theta) < 1e-3);
  }
}

TEST_CASE("spectrum is invariant to a common phase on every block") {
  Rng rng(79);
  const auto g = ArrayGeometry::ula(12);
  const auto s = random_schedule(rng, 12, 5);
  const auto snaps = simulate_snapshots(g, gains_for_snr(g, 5.0), s, {4.0, 0.0}, rng);
  SnapshotSet rotated = snaps;
  for (auto& b : rotated.blocks) b *= std::polar(1.0, 1.234);
  const MusicEstimator est(g, gains_for_snr(g, 5.0), s, {});
  const auto a = est.spectrum(sample_covariance(snaps));
  const auto b = est.spectrum(sample_covariance(rotated));
  for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] == doctest::Approx(b.values[k]).epsilon(1e-8));
  CHECK(a.peak == doctest::Approx(b.peak).epsilon(1e-6));
}

TEST_CASE("spectrum values are non-negative and the refined peak beats the grid") {
  Rng rng(83);
  const auto g = ArrayGeometry::ula(16);
  const auto s = random_schedule(rng, 16, 7);
  const MusicEstimator est(g, gains_for_snr(g, 0.0), s, {});
  const auto spec = est.spectrum(sample_covariance(simulate_snapshots(g, gains_for_snr(g, 0.0), s, {10.0, 0.0}, rng)));
  for (double v : spec.values) CHECK(v >= 0.0);
  CHECK(spec.peak_value >= *std::max_element(spec.values.begin(), spec.values.end()));
  CHECK(spec.grid.front() == -30.0);
  CHECK(spec.grid.back() == 30.0);
}

TEST_CASE("identical slots give a flat, unreliable spectrum") {
  Rng rng(89);
  RisSchedule s;
  const CVector w = testing::random_phases(rng, 8);
  s.weights.resize(8, 4);
  for (int t = 0; t < 4; ++t) s.weights.col(t) = w;
  const auto g = ArrayGeometry::ula(8);
  const MusicEstimator est(g, gains_for_snr(g, 0.0), s, {});
  CHECK_FALSE(est.spectrum(sample_covariance(simulate_snapshots(g, gains_for_snr(g, 0.0), s, {0.0, 0.0}, rng))).reliable);
}

TEST_CASE("MSE at very high SNR hits the search-accuracy floor") {
  Rng rng(97);
  MseConfig c;
  c.geometry = ArrayGeometry::ula(16);
  c.snr_db = {80.0};
  c.trials = 5;
  const auto pts = mse_experiment(random_schedule(rng, 16, 7), c);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].mse_deg2 < 1e-6);
  CHECK(pts[0].trials == 5);
}

TEST_CASE("MSE does not depend on the thread count") {
  Rng rng(101);
  const auto s = random_schedule(rng, 16, 7);
  MseConfig c;
  c.geometry = ArrayGeometry::ula(16);
  c.trials = 40;
  const auto a = mse_experiment(s, c);
#ifdef RISBEAM_HAS_OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
#endif
  const auto b = mse_experiment(s, c);
#ifdef RISBEAM_HAS_OPENMP
  omp_set_num_threads(saved);
#endif
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].mse_deg2 == b[k].mse_deg2);
}

TEST_CASE("sweep schedule steers each slot toward its center") {
  const auto g = ArrayGeometry::ula(64);
  const Interval roi{-30.0, 30.0};
  const auto quant = sweep_baseline_schedule(g, {}, 4, roi, 7);
  const auto exact = sweep_baseline_schedule(g, {}, 0, roi, 7);
  const auto centers = sweep_centers(roi, 7);
  CHECK(centers.front() == -30.0);
  CHECK(centers.back() == 30.0);
  const double hpbw = beamwidth(64, 3.0);
  for (int t = 0; t < 7; ++t) {
    std::vector<Angle> grid;
    for (double th = centers[t] - 3.0; th <= centers[t] + 3.0; th += 0.001) grid.push_back({th, 0.0});
    const RVector pq = beam_power(g, {}, quant.weights.col(t), grid);
    const RVector pe = beam_power(g, {}, exact.weights.col(t), grid);
    Eigen::Index iq, ie;
    pq.maxCoeff(&iq);
    pe.maxCoeff(&ie);
    CHECK(std::abs(grid[iq].theta - centers[t]) < hpbw / 2);
    CHECK(std::abs(grid[ie].theta - centers[t]) < 1e-2);
    const double loss = to_db(pe.maxCoeff()) - to_db(pq.maxCoeff());
    CHECK(loss >= 0.0);
    CHECK(loss <= -20.0 * std::log10(std::cos(kPi / 4)) + 1e-9);
  }
}

TEST_CASE("average quantization loss at the beam center matches the uniform-error value") {
  // Phase errors uniform on [-pi/L, pi/L] keep E|mean e^{j err}|^2 = sinc^2(pi/L).
  const auto g = ArrayGeometry::ula(64);
  const double expect = -20.0 * std::log10(std::sin(kPi / 4) / (kPi / 4));
  Rng rng(113);
  double total = 0;
  const int n = 300;
  for (int k = 0; k < n; ++k) {
    const double c = rng.uniform(-60, 60);
    const Interval iv{c, c + 1.0};
    const std::vector<Angle> at{{c, 0.0}};
    const double q = beam_power(g, {}, sweep_baseline_schedule(g, {}, 4, iv, 2).weights.col(0), at)[0];
    const double e = beam_power(g, {}, sweep_baseline_schedule(g, {}, 0, iv, 2).weights.col(0), at)[0];
    total += to_db(e) - to_db(q);
  }
  CHECK(std::abs(total / n - expect) < 0.1);
}

TEST_CASE("wide-beam schedule uses distinct discrete slots") {
  SynthesisProblem base;
  base.geometry = ArrayGeometry::ula(16);
  base.grid_step = 2.0;
  const auto s = widebeam_schedule(base, 4, 3);
  CHECK(s.slots() == 4);
  CHECK(s.blocks == 3);
  for (auto w : s.weights.reshaped()) CHECK(std::abs(w) == doctest::Approx(1.0));
  const auto lambdas = widebeam_lambdas(7);
  CHECK(lambdas.front() == doctest::Approx(0.1));
  CHECK(lambdas.back() == doctest::Approx(100.0));
}
