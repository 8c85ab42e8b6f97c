#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>
#include <json.hpp>

#include "risbeam/harness.hpp"
#include "risbeam/parallel.hpp"

namespace fs = std::filesystem;
using namespace risbeam;

namespace {

struct GeometryFlags {
  std::string array = "ula";
  int n = 64;
  int rows = 8;
  int cols = 8;
  double spacing = 0.5;
  double bs_angle = 0.0;

  void add(CLI::App* app) {
    app->add_option("--array", array, "Array geometry")->check(CLI::IsMember({"ula", "upa"}))->capture_default_str();
    app->add_option("--n", n, "Number of elements (ULA)")->capture_default_str();
    app->add_option("--rows", rows, "UPA rows (z axis)")->capture_default_str();
    app->add_option("--cols", cols, "UPA columns (y axis)")->capture_default_str();
    app->add_option("--spacing", spacing, "Element spacing in wavelengths")->capture_default_str();
    app->add_option("--bs-angle", bs_angle, "Base-station angle phi in degrees")->capture_default_str();
  }
};

struct SynthesisFlags {
  GeometryFlags geo;
  int levels = 4;
  std::string mode = "discrete";
  std::string roi = "-30:30";
  std::vector<double> lambdas = default_lambda_sweep();
  int restarts = 1;
  double grid_step = 0.0;
  double eval_step = 0.0;
  double epsilon = 1e-4;
  int max_iters = 200;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    geo.add(app);
    app->add_option("--levels", levels, "Phase levels L")->capture_default_str();
    app->add_option("--mode", mode, "Constraint mode")
        ->check(CLI::IsMember({"discrete", "hull", "cmc", "power"}))
        ->capture_default_str();
    app->add_option("--roi", roi, "Region of interest lo:hi[,lo:hi...] in degrees (UPA: el_lo:el_hi/az_lo:az_hi)")
        ->capture_default_str();
    app->add_option("--lambda", lambdas, "Penalty weights; the best projected result is kept")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--restarts", restarts, "Random restarts per lambda")->capture_default_str();
    app->add_option("--grid-step", grid_step, "Optimization grid step in degrees (0: default for N)")
        ->capture_default_str();
    app->add_option("--eval-step", eval_step, "Evaluation grid step in degrees (0: derived)")->capture_default_str();
    app->add_option("--epsilon", epsilon, "MM stopping tolerance")->capture_default_str();
    app->add_option("--max-iters", max_iters, "MM iteration cap")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
  }

  ExperimentConfig config(ExperimentKind kind) const {
    ExperimentConfig c;
    c.experiment = kind;
    c.array = geo.array;
    c.n = {geo.n};
    c.rows = geo.rows;
    c.cols = geo.cols;
    c.spacing = geo.spacing;
    c.bs_angle = geo.bs_angle;
    c.levels = {levels};
    c.mode = mode;
    c.roi = roi;
    c.lambdas = lambdas;
    c.restarts = restarts;
    c.grid_step = grid_step;
    c.eval_step = eval_step;
    c.epsilon = epsilon;
    c.max_iters = max_iters;
    c.master_seed = seed;
    return c;
  }
};

struct MonteCarloFlags {
  std::vector<int> n{64};
  double spacing = 0.5;
  double bs_angle = 0.0;
  int levels = 4;
  std::string roi = "-30:30";
  int slots = 7;
  int blocks = 4;
  std::vector<std::string> schedules{"widebeam", "sweep"};
  std::vector<double> snr_db;
  int trials;
  std::uint64_t seed = 1;

  MonteCarloFlags(std::vector<double> snr, int t) : snr_db(std::move(snr)), trials(t) {}

  void add(CLI::App* app) {
    app->add_option("--n", n, "Numbers of elements (ULA)")->delimiter(',')->capture_default_str();
    app->add_option("--spacing", spacing, "Element spacing in wavelengths")->capture_default_str();
    app->add_option("--bs-angle", bs_angle, "Base-station angle phi in degrees")->capture_default_str();
    app->add_option("--levels", levels, "Phase levels L")->capture_default_str();
    app->add_option("--roi", roi, "Region of interest lo:hi in degrees")->capture_default_str();
    app->add_option("--slots", slots, "Slots T per block")->capture_default_str();
    app->add_option("--blocks", blocks, "Blocks Q per trial")->capture_default_str();
    app->add_option("--schedule", schedules, "Schedules to evaluate")
        ->delimiter(',')
        ->check(CLI::IsMember({"widebeam", "sweep"}))
        ->capture_default_str();
    app->add_option("--snr", snr_db, "Single-element SNR values in dB")->delimiter(',')->capture_default_str();
    app->add_option("--trials", trials, "Monte Carlo trials per SNR")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
  }

  ExperimentConfig config(ExperimentKind kind) const {
    ExperimentConfig c;
    c.experiment = kind;
    c.n = n;
    c.spacing = spacing;
    c.bs_angle = bs_angle;
    c.levels = {levels};
    c.roi = roi;
    c.slots = slots;
    c.blocks = blocks;
    c.schedules = schedules;
    c.snr_db = snr_db;
    c.trials = trials;
    c.master_seed = seed;
    return c;
  }
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void report(const RunReport& r) {
  for (const auto& f : r.files) std::cout << f.string() << '\n';
}

int synthesize(const SynthesisFlags& f, int slots, int max_pivots, const std::string& out_dir,
               const std::string& dump_lp) {
  const ExperimentConfig c = f.config(ExperimentKind::Pattern);
  c.validate();
  SynthesisProblem p = synthesis_problem(c, f.geo.n, f.levels);
  p.slots = slots;
  p.lp.max_iterations = max_pivots;
  p.validate();

  fs::create_directories(out_dir);
  std::ofstream dump;
  std::mutex dump_mutex;
  if (!dump_lp.empty()) {
    dump = open_output(dump_lp);
    p.on_subproblem = [&](int k, const LinearProgram& lp) {
      const std::lock_guard lock(dump_mutex);
      dump << "# iteration " << k << '\n';
      write_lp(dump, lp);
    };
  }

  const auto started = std::chrono::steady_clock::now();
  const SynthesisResult r = solve_lambda_sweep(p, f.lambdas, f.restarts);
  const Flatness flat = evaluate_flatness(p, r.weights_projected, p.effective_eval_step());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const fs::path result_path = fs::path(out_dir) / "result.csv";
  auto out = open_output(result_path);
  write_result_csv(out, r, flat);

  nlohmann::json m;
  m["config"] = nlohmann::json::parse(config_to_json(c));
  m["config"]["slots"] = slots;
  m["version"] = version_string();
  m["wall_clock_s"] = wall;
  m["threads"] = max_threads();
  m["selected_lambda"] = r.lambda;
  m["selected_seed"] = r.seed;
  m["iterations"] = r.iterations;
  m["lp_pivots"] = r.lp_pivots;
  m["converged"] = r.converged;
  m["min_power_relaxed_db"] = to_db(r.min_power_relaxed);
  m["min_power_projected_db"] = to_db(r.min_power_projected);
  m["warnings"] = r.warnings;
  m["files"] = {"result.csv", "manifest.json"};
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  auto mout = open_output(manifest_path);
  mout << m.dump(2) << '\n';

  std::cout << "min ROI power (projected): " << fmt(to_db(r.min_power_projected)) << " dB, lambda "
            << fmt(r.lambda) << ", " << r.iterations << " iterations\n"
            << result_path.string() << '\n'
            << manifest_path.string() << '\n';
  return 0;
}

int beamwidth_table(const std::vector<int>& ns, const std::string& out_dir) {
  for (int n : ns)
    if (n < 2) throw std::invalid_argument("--n: entries must be >= 2");
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "beamwidth.csv";
  auto out = open_output(path);
  const std::string header = "n,bw_3db_deg,bw_1db_deg,bw_0.5db_deg\n";
  out << header;
  std::cout << header;
  for (int n : ns) {
    const std::string row = std::to_string(n) + ',' + fmt(beamwidth(n, 3.0)) + ',' + fmt(beamwidth(n, 1.0)) + ',' +
                            fmt(beamwidth(n, 0.5)) + '\n';
    out << row;
    std::cout << row;
  }
  return 0;
}

int sweep_baseline(const GeometryFlags& g, int levels, const std::string& roi, int slots, const std::string& out_dir) {
  if (g.array != "ula") throw std::invalid_argument("--array: the sweep baseline supports ULA only");
  const ArrayGeometry geom = ArrayGeometry::ula(g.n, g.spacing);
  geom.validate();
  const auto region = RegionOfInterest::parse(roi).normalized();
  if (region.intervals.size() != 1) throw std::invalid_argument("--roi: must be a single interval");
  ChannelGains gains;
  gains.bs_angle = {g.bs_angle, 0.0};
  const RisSchedule s = sweep_baseline_schedule(geom, gains, levels, region.intervals.front(), slots);

  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "sweep_schedule.csv";
  auto out = open_output(path);
  const auto centers = sweep_centers(region.intervals.front(), slots);
  out << "slot,center_deg,index,re,im\n";
  for (int t = 0; t < slots; ++t)
    for (int i = 0; i < g.n; ++i) {
      const cplx w = s.weights(i, t);
      out << t << ',' << fmt(centers[static_cast<std::size_t>(t)]) << ',' << i << ',' << fmt(w.real()) << ','
          << fmt(w.imag()) << '\n';
    }
  std::cout << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads();
  CLI::App app{"Wide-beam RIS phase synthesis, MUSIC AOA estimation and detection experiments"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);
  std::string out_dir = "out";
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
  };

  SynthesisFlags synth;
  int synth_slots = 1;
  std::string dump_lp;
  int lp_max_pivots = LpOptions{}.max_iterations;
  auto* cmd_synth = app.add_subcommand("synthesize", "Synthesize one wide beam and write result.csv and manifest.json");
  synth.add(cmd_synth);
  cmd_synth->add_option("--slots", synth_slots, "Slots sharing one synthesis")->capture_default_str();
  cmd_synth->add_option("--dump-lp", dump_lp, "Write every LP subproblem to this file");
  cmd_synth->add_option("--lp-max-pivots", lp_max_pivots, "Pivot limit per LP subproblem")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_out(cmd_synth);

  SynthesisFlags pat;
  auto* cmd_pattern = app.add_subcommand("pattern", "Synthesize and write beam patterns with a manifest");
  pat.add(cmd_pattern);
  add_out(cmd_pattern);

  std::vector<int> bw_n{64, 100, 128, 256};
  auto* cmd_bw = app.add_subcommand("beamwidth-table", "Boresight beamwidths at -3, -1 and -0.5 dB");
  cmd_bw->add_option("--n", bw_n, "Array sizes")->delimiter(',')->capture_default_str();
  add_out(cmd_bw);

  MonteCarloFlags music({-10.0, 0.0, 10.0}, 200);
  music.schedules = {"widebeam"};
  auto* cmd_music = app.add_subcommand("music", "MUSIC angle-estimation MSE versus SNR");
  music.add(cmd_music);
  add_out(cmd_music);

  MonteCarloFlags detect({-15.0}, 500);
  double p_fa = 0.0;
  std::vector<double> p_fa_grid = ExperimentConfig{}.p_fa_grid;
  auto* cmd_detect = app.add_subcommand("detect", "GLRT and energy-detector ROC (or P_D at one P_FA)");
  detect.add(cmd_detect);
  cmd_detect->add_option("--p-fa", p_fa, "Report P_D at this single false-alarm rate instead of a ROC");
  cmd_detect->add_option("--p-fa-grid", p_fa_grid, "False-alarm targets of the ROC")
      ->delimiter(',')
      ->capture_default_str();
  add_out(cmd_detect);

  GeometryFlags sweep_geo;
  int sweep_levels = 4;
  std::string sweep_roi = "-30:30";
  int sweep_slots = 7;
  auto* cmd_sweep = app.add_subcommand("sweep-baseline", "Quantized beam-sweeping schedule");
  sweep_geo.add(cmd_sweep);
  cmd_sweep->add_option("--levels", sweep_levels, "Phase levels L (<= 0 leaves weights unquantized)")
      ->capture_default_str();
  cmd_sweep->add_option("--roi", sweep_roi, "Swept interval lo:hi in degrees")->capture_default_str();
  cmd_sweep->add_option("--slots", sweep_slots, "Slots T")->capture_default_str();
  add_out(cmd_sweep);

  std::string config_path;
  bool out_given = false;
  auto* cmd_run = app.add_subcommand("run-config", "Run an experiment described by a JSON file");
  cmd_run->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  cmd_run->add_option("--out", out_dir, "Output directory (overrides the file's \"output\")")
      ->each([&](const std::string&) { out_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*cmd_synth) return synthesize(synth, synth_slots, lp_max_pivots, out_dir, dump_lp);
    if (*cmd_bw) return beamwidth_table(bw_n, out_dir);
    if (*cmd_sweep) return sweep_baseline(sweep_geo, sweep_levels, sweep_roi, sweep_slots, out_dir);
    ExperimentConfig c;
    if (*cmd_pattern) {
      c = pat.config(ExperimentKind::Pattern);
    } else if (*cmd_music) {
      c = music.config(ExperimentKind::MusicMse);
    } else if (*cmd_detect) {
      c = detect.config(p_fa > 0.0 ? ExperimentKind::FixedPfa : ExperimentKind::Roc);
      if (p_fa > 0.0) c.p_fa = p_fa;
      c.p_fa_grid = p_fa_grid;
    } else {
      c = load_config(config_path);
      if (!out_given) out_dir = c.output;
    }
    c.output = out_dir;
    c.validate();
    report(run(c));
    return 0;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
