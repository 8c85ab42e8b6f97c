#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "risbeam/detection.hpp"
#include "risbeam/parallel.hpp"
#include "risbeam/special_functions.hpp"

using namespace risbeam;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmtd(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... A>
std::string format(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Outcome beamwidth_table() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    int n;
    double w[3];
  };
  const Row rows[] = {{64, {1.6, 0.935, 0.666}},
                      {100, {1.0, 0.6, 0.4263}},
                      {128, {0.8, 0.4682, 0.333}},
                      {256, {0.4, 0.2341, 0.166}}};
  const double drops[] = {3.0, 1.0, 0.5};
  double worst = 0;
  for (const auto& r : rows)
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(beamwidth(r.n, drops[k]) - r.w[k]));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 0.05 && secs < 1.0, format("max deviation %.4f deg, %.3f s", worst, secs)};
}

Outcome mm_monotonicity() {
  struct Run {
    int n, levels;
    double lambda;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  const double lambdas[] = {0.0, 1.0, 10.0, 100.0};
  int k = 0;
  for (int n : {8, 16, 32, 128})
    for (int levels : {2, 4, 8})
      for (std::uint64_t seed : {1, 2}) runs.push_back({n, levels, lambdas[k++ % 4], seed});
  std::vector<int> ok(runs.size()), iters(runs.size());
  std::vector<double> drop(runs.size());
  parallel_for(static_cast<std::ptrdiff_t>(runs.size()), [&](std::ptrdiff_t i) {
    const Run& r = runs[static_cast<std::size_t>(i)];
    SynthesisProblem p;
    p.geometry = ArrayGeometry::ula(r.n);
    p.levels = r.levels;
    p.lambda = r.lambda;
    p.seed = r.seed;
    p.epsilon = 1e-4;
    p.max_iters = 200;
    const auto res = mm_solve(p);
    double worst = 0;
    for (std::size_t t = 1; t < res.t_trace.size(); ++t) worst = std::max(worst, res.t_trace[t - 1] - res.t_trace[t]);
    drop[static_cast<std::size_t>(i)] = worst;
    iters[static_cast<std::size_t>(i)] = res.iterations;
    ok[static_cast<std::size_t>(i)] = worst <= 1e-9 && res.converged && res.iterations <= 200;
  });
  const int passed = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
  return {passed == static_cast<int>(runs.size()),
          format("%d/%zu runs monotone and converged, largest decrease %.2e, max iterations %d", passed, runs.size(),
                 *std::max_element(drop.begin(), drop.end()), *std::max_element(iters.begin(), iters.end()))};
}

Outcome brute_force_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const int instances = 50;
  const auto alph = alphabet(4);
  Rng rng(2025);
  std::vector<SynthesisProblem> problems;
  for (int i = 0; i < instances; ++i) {
    SynthesisProblem p;
    p.geometry = ArrayGeometry::ula(rng.uniform_int(4, 8));
    p.levels = 4;
    const double lo = rng.uniform(-60, 40);
    const double hi = std::min(lo + rng.uniform(5, 40), 90.0);
    p.roi.intervals = {{lo, hi}};
    p.grid_step = (hi - lo) / 19.0;  // 20 grid points
    p.gains.bs_angle = {rng.uniform(-30, 30), 0.0};
    p.seed = 1 + 10 * static_cast<std::uint64_t>(i);
    problems.push_back(p);
  }
  std::vector<double> gap(instances);
  std::vector<int> violated(instances);
  parallel_for(instances, [&](std::ptrdiff_t i) {
    const auto& p = problems[static_cast<std::size_t>(i)];
    const auto grid = make_grid(p.roi, p.grid_step);
    const CMatrix table = channel_table(p.geometry, p.gains, grid);
    const int n = p.geometry.size();
    int total = 1;
    for (int e = 0; e < n; ++e) total *= 4;
    double best = 0;
    CVector v(n);
    for (int code = 0; code < total; ++code) {
      for (int e = 0, c = code; e < n; ++e, c /= 4) v[e] = alph.values[static_cast<std::size_t>(c % 4)];
      best = std::max(best, beam_power(table, v).minCoeff());
    }
    double got = 0;
    for (double lambda : default_lambda_sweep())
      for (int r = 0; r < 5; ++r) {
        SynthesisProblem q = p;
        q.lambda = lambda;
        q.seed = p.seed + static_cast<std::uint64_t>(r);
        got = std::max(got, beam_power(table, mm_solve(q).weights_projected).minCoeff());
      }
    violated[static_cast<std::size_t>(i)] = got > best + 1e-9;
    gap[static_cast<std::size_t>(i)] = to_db(best) - to_db(got);
  });
  const int close = static_cast<int>(std::count_if(gap.begin(), gap.end(), [](double g) { return g <= 1.5; }));
  const int bad = static_cast<int>(std::count(violated.begin(), violated.end(), 1));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {bad == 0 && close >= 40 && secs < 120.0,
          format("%d/%d within 1.5 dB (worst gap %.2f dB), %d above the exhaustive optimum, %.1f s", close, instances,
                 *std::max_element(gap.begin(), gap.end()), bad, secs)};
}

Outcome vertex_dominance() {
  Rng rng(4);
  const auto alph = alphabet(4);
  const auto hull = hull_halfplanes(alph);
  int exceed = 0;
  double margin = -1e300;
  const int instances = 40;
  for (int inst = 0; inst < instances; ++inst) {
    const int n = rng.uniform_int(1, 4);
    CMatrix b(n + 2, n);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.complex_normal(1.0);
    const CMatrix m = b.adjoint() * b;
    const double lambda = rng.uniform(0.0, 5.0);
    auto f = [&](const CVector& v) { return (v.adjoint() * m * v)(0).real() + lambda * v.squaredNorm(); };
    int total = 1;
    for (int e = 0; e < n; ++e) total *= 4;
    double best = -1e300;
    CVector v(n);
    for (int code = 0; code < total; ++code) {
      for (int e = 0, c = code; e < n; ++e, c /= 4) v[e] = alph.values[static_cast<std::size_t>(c % 4)];
      best = std::max(best, f(v));
    }
    for (int k = 0; k < 10000; ++k) {
      for (int e = 0; e < n; ++e) {
        // Uniform point in the square hull by rejection from the bounding box.
        cplx w;
        do w = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        while (!hull.contains(w, 0.0));
        v[e] = w;
      }
      const double val = f(v);
      margin = std::max(margin, val - best);
      if (val > best + 1e-9) ++exceed;
    }
  }
  return {exceed == 0, format("%d of %d hull samples above the vertex maximum (largest excess %.3g)", exceed,
                              instances * 10000, margin)};
}

SynthesisProblem fig_problem(int n) {
  SynthesisProblem p;
  p.geometry = ArrayGeometry::ula(n);
  p.levels = 4;
  p.roi = RegionOfInterest::parse("-30:30");
  return p;
}

Outcome quantization_gap() {
  const auto t0 = std::chrono::steady_clock::now();
  SynthesisProblem p = fig_problem(128);
  p.lambda = default_lambda_sweep().back();
  const auto proposed = mm_solve(p);
  const auto baseline = direct_quantize_baseline(p);
  const double gap = to_db(proposed.min_power_projected) - to_db(baseline.min_power_projected);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {gap >= 3.0 && secs < 600.0, format("proposed %.2f dB, direct quantization %.2f dB, gap %.2f dB, %.1f s",
                                             to_db(proposed.min_power_projected), to_db(baseline.min_power_projected),
                                             gap, secs)};
}

Outcome flatness() {
  SynthesisProblem p = fig_problem(128);
  p.lambda = 10.0;
  double ripple[2];
  const double steps[] = {0.1, 1.0};
  for (int k = 0; k < 2; ++k) {
    p.grid_step = steps[k];
    ripple[k] = evaluate_flatness(p, mm_solve(p).weights_projected, steps[k] / 10.0).ripple_db;
  }
  return {ripple[1] - ripple[0] >= 6.0,
          format("ripple %.2f dB (0.1 deg grid) vs %.2f dB (1 deg grid)", ripple[0], ripple[1])};
}

Outcome glrt_distributions() {
  // The statistic's law only depends on ||mu-hat||.
  Rng rng(7);
  CVector mu(7);
  for (int t = 0; t < 7; ++t) mu[t] = rng.complex_normal(0.3);
  const double m = mu.squaredNorm();
  const double sigma_sq = 1.0;
  const double p_fa = 0.01;
  const double eta = glrt_closed_form(m, p_fa, sigma_sq).threshold;
  const int n = 100000;
  std::vector<double> h0(n), h1(n);
  for (int k = 0; k < n; ++k) {
    CVector w(7);
    for (int t = 0; t < 7; ++t) w[t] = rng.complex_normal(sigma_sq);
    h0[static_cast<std::size_t>(k)] = glrt_statistic(w, mu);
    for (int t = 0; t < 7; ++t) w[t] = rng.complex_normal(sigma_sq);
    h1[static_cast<std::size_t>(k)] = glrt_statistic(mu + w, mu);
  }
  auto moments = [&](const std::vector<double>& x) {
    double s = 0, q = 0;
    for (double v : x) s += v;
    const double mean = s / n;
    for (double v : x) q += (v - mean) * (v - mean);
    return std::pair{mean, q / (n - 1)};
  };
  const auto [m0, v0] = moments(h0);
  const auto [m1, v1] = moments(h1);
  const double var = 0.5 * sigma_sq * m;
  const double se_mean = std::sqrt(var / n);
  const double se_var = var * std::sqrt(2.0 / (n - 1));
  const double z[] = {std::abs(m0) / se_mean, std::abs(m1 - m) / se_mean, std::abs(v0 - var) / se_var,
                      std::abs(v1 - var) / se_var};
  const double zmax = *std::max_element(std::begin(z), std::end(z));
  const double pfa = static_cast<double>(std::count_if(h0.begin(), h0.end(), [&](double v) { return v > eta; })) / n;
  return {zmax <= 3.0 && std::abs(pfa - p_fa) <= 0.003,
          format("largest moment deviation %.2f SE, empirical P_FA %.4f at target %.2f", zmax, pfa, p_fa)};
}

Outcome energy_closed_form_check() {
  Rng rng(8);
  const int n = 100000;
  int hits = 0;
  const double gamma = std::log(100.0);
  for (int k = 0; k < n; ++k) hits += std::norm(rng.complex_normal(1.0)) > gamma;
  const double pfa = static_cast<double>(hits) / n;

  std::vector<double> stat(n);
  for (auto& s : stat) {
    double v = 0;
    for (int t = 0; t < 7; ++t) v += std::norm(rng.complex_normal(1.0));
    s = 2.0 * v;
  }
  std::sort(stat.begin(), stat.end());
  double ks = 0;
  for (int k = 0; k < n; ++k) {
    const double c = chi2_cdf(14.0, stat[static_cast<std::size_t>(k)]);
    ks = std::max({ks, std::abs(c - static_cast<double>(k) / n), std::abs(c - static_cast<double>(k + 1) / n)});
  }
  return {std::abs(pfa - 0.01) <= 0.002 && ks <= 0.01,
          format("T=1 empirical P_FA %.4f, T=7 Kolmogorov distance %.4f", pfa, ks)};
}

struct Schedules {
  RisSchedule wide;
  RisSchedule sweep;
};

Schedules desk_schedules() {
  SynthesisProblem base = fig_problem(64);
  base.seed = 1;
  ChannelGains unit;
  return {widebeam_schedule(base, 7, 4), sweep_baseline_schedule(base.geometry, unit, 4, {-30.0, 30.0}, 7, 4)};
}

Outcome detection_ordering(const Schedules& s) {
  DetectionConfig c;
  c.geometry = ArrayGeometry::ula(64);
  c.trials = 500;
  c.snr_db = {-15.0};
  auto pick = [](const std::vector<RocRow>& rows, const std::string& det) {
    for (const auto& r : rows)
      if (r.detector == det && r.point.source == RocSource::MonteCarlo) return r.point;
    return RocPoint{};
  };
  const auto wide = fixed_pfa_experiment(s.wide, "widebeam", c, 0.01);
  const auto sweep = fixed_pfa_experiment(s.sweep, "sweep", c, 0.01);
  const RocPoint wg = pick(wide, "glrt"), we = pick(wide, "energy"), wc = pick(wide, "glrt_calibrated");
  const RocPoint sg = pick(sweep, "glrt"), se = pick(sweep, "energy"), sc = pick(sweep, "glrt_calibrated");
  const bool pass = wg.p_d >= sg.p_d && wg.p_d >= we.p_d && sg.p_d >= se.p_d;
  return {pass, format("P_D wide: glrt %.3f energy %.3f | sweep: glrt %.3f energy %.3f | measured glrt P_FA %.3f/%.3f; "
                       "calibrated glrt %.3f/%.3f",
                       wg.p_d, we.p_d, sg.p_d, se.p_d, wg.p_fa, sg.p_fa, wc.p_d, sc.p_d)};
}

Outcome music_trend(const Schedules& s) {
  MseConfig c;
  c.geometry = ArrayGeometry::ula(64);
  c.trials = 200;
  c.snr_db = {-10.0, 0.0, 10.0};
  const auto pts = mse_experiment(s.wide, c);
  const bool decreasing = pts[0].mse_deg2 > pts[1].mse_deg2 && pts[1].mse_deg2 > pts[2].mse_deg2;

  const MusicEstimator est(c.geometry, ChannelGains{}, s.wide, {});
  Rng rng(10);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double theta = rng.uniform(-30.0, 30.0);
    SnapshotSet snaps;
    for (int q = 0; q < s.wide.blocks; ++q) snaps.blocks.push_back(noiseless_block(c.geometry, {}, s.wide, {theta, 0.0}));
    worst = std::max(worst, std::abs(est.spectrum(sample_covariance(snaps)).peak - theta));
  }
  return {decreasing && worst <= 1e-3,
          format("MSE %.3g / %.3g / %.3g deg^2 at -10/0/10 dB, noiseless worst error %.2e deg", pts[0].mse_deg2,
                 pts[1].mse_deg2, pts[2].mse_deg2, worst)};
}

}  // namespace

int main() {
  configure_threads();
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                fmtd("%.1f s", secs).c_str());
    std::fflush(stdout);
  };

  report(1, "beamwidth table", beamwidth_table);
  report(2, "MM monotonicity", mm_monotonicity);
  report(3, "exhaustive-search oracle", brute_force_oracle);
  report(4, "vertex dominance", vertex_dominance);
  report(5, "quantization gap", quantization_gap);
  report(6, "discretization flatness", flatness);
  report(7, "GLRT statistic distributions", glrt_distributions);
  report(8, "energy detector closed form", energy_closed_form_check);
  Schedules s;
  bool have_schedules = false;
  auto with_schedules = [&](auto f) {
    return [&, f] {
      if (!have_schedules) {
        s = desk_schedules();
        have_schedules = true;
      }
      return f(s);
    };
  };
  report(9, "detection ordering", with_schedules(detection_ordering));
  report(10, "MUSIC MSE trend", with_schedules(music_trend));
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
