#include <benchmark/benchmark.h>

#ifdef RISBEAM_HAS_OPENMP
#include <omp.h>
#endif

#include "risbeam/music.hpp"
#include "risbeam/parallel.hpp"

using namespace risbeam;

namespace {

struct PatternFixture {
  CMatrix table;
  CVector weights;

  explicit PatternFixture(int n) {
    const auto g = ArrayGeometry::ula(n);
    const auto grid = make_grid(RegionOfInterest::parse("-90:90"), 0.01);
    table = channel_table(g, {}, grid);
    Rng rng(5);
    weights.resize(n);
    for (int i = 0; i < n; ++i) weights[i] = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
  }
};

void BM_BeamPowerSerial(benchmark::State& state) {
  const PatternFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(beam_power_serial(f.table, f.weights));
  state.SetItemsProcessed(state.iterations() * f.table.cols());
}

void BM_BeamPowerParallel(benchmark::State& state) {
  const PatternFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(beam_power(f.table, f.weights));
  state.SetItemsProcessed(state.iterations() * f.table.cols());
}

RisSchedule random_schedule(int n) {
  Rng rng(9);
  RisSchedule s;
  s.weights.resize(n, 7);
  for (Eigen::Index i = 0; i < s.weights.size(); ++i) s.weights.data()[i] = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
  return s;
}

void run_mse(benchmark::State& state, int threads) {
  MseConfig c;
  c.geometry = ArrayGeometry::ula(64);
  c.snr_db = {0.0};
  c.trials = 64;
  const auto s = random_schedule(64);
#ifdef RISBEAM_HAS_OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : saved);
#else
  (void)threads;
#endif
  for (auto _ : state) benchmark::DoNotOptimize(mse_experiment(s, c));
#ifdef RISBEAM_HAS_OPENMP
  omp_set_num_threads(saved);
#endif
  state.SetItemsProcessed(state.iterations() * c.trials);
}

void BM_MonteCarloSerial(benchmark::State& state) { run_mse(state, 1); }
void BM_MonteCarloParallel(benchmark::State& state) { run_mse(state, 0); }

}  // namespace

BENCHMARK(BM_BeamPowerSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BeamPowerParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  configure_threads();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
