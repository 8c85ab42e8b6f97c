#include "risbeam/harness.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "risbeam/parallel.hpp"
#include "risbeam/rng.hpp"

#ifndef RISBEAM_VERSION
#define RISBEAM_VERSION "unknown"
#endif

namespace risbeam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::Pattern, "pattern"},     {ExperimentKind::LambdaSweep, "lambda_sweep"},
    {ExperimentKind::NSweep, "n_sweep"},      {ExperimentKind::LSweep, "l_sweep"},
    {ExperimentKind::MusicMse, "music_mse"},  {ExperimentKind::Roc, "roc"},
    {ExperimentKind::FixedPfa, "fixed_pfa"},
};

template <class T>
T get_as(const json& value, const std::string& key, const char* type_name) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: key '" + key + "' must be " + type_name);
  }
}

template <class T>
std::vector<T> get_list(const json& value, const std::string& key, const char* type_name) {
  if (value.is_array()) return get_as<std::vector<T>>(value, key, type_name);
  return {get_as<T>(value, key, type_name)};
}

// Opens `path` for writing and records it so a failed run can clean up.
class OutputSet {
public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files_.push_back(path);
    return out;
  }

  void close(std::ofstream& out, const std::string& name) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + (dir_ / name).string());
  }

  void remove_all() noexcept {
    for (const auto& f : files_) {
      std::error_code ec;
      fs::remove(f, ec);
    }
    files_.clear();
  }

  const std::vector<fs::path>& files() const { return files_; }

private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

Interval single_interval(const ExperimentConfig& c) {
  const auto roi = RegionOfInterest::parse(c.roi).normalized();
  if (roi.intervals.size() != 1) throw std::invalid_argument("config: 'roi' must be a single interval for this experiment");
  return roi.intervals.front();
}

double mean_db(const RVector& p) { return to_db(p.size() == 0 ? 0.0 : p.mean()); }

std::vector<Angle> pattern_grid(const SynthesisProblem& p) {
  if (p.geometry.kind == ArrayKind::Ula) return make_grid(RegionOfInterest{{{-90.0, 90.0}}, {}}, p.effective_eval_step());
  return make_grid(RegionOfInterest{{}, {{{-90.0, 90.0}, {-90.0, 90.0}}}}, 1.0, 1.0);
}

void write_pattern(OutputSet& outs, const SynthesisProblem& p, const SynthesisResult& best,
                   const SynthesisResult& baseline) {
  const auto grid = pattern_grid(p);
  const std::pair<const char*, const CVector*> files[] = {
      {"pattern.csv", &best.weights_projected},
      {"pattern_relaxed.csv", &best.weights},
      {"pattern_baseline.csv", &baseline.weights_projected},
  };
  for (const auto& [name, w] : files) {
    auto out = outs.open(name);
    write_pattern_csv(out, p.geometry.kind, grid, beam_power(p.geometry, p.gains, *w, grid));
    outs.close(out, name);
  }
}

// ROI complement within [-90, 90] with `guard` degrees removed next to every
// ROI edge.
std::vector<Angle> side_grid(const Interval& roi, double guard, double step) {
  RegionOfInterest side;
  if (roi.lo - guard > -90.0) side.intervals.push_back({-90.0, roi.lo - guard});
  if (roi.hi + guard < 90.0) side.intervals.push_back({roi.hi + guard, 90.0});
  if (side.intervals.empty()) return {};
  return make_grid(side, step);
}

RisSchedule build_schedule(const ExperimentConfig& c, const std::string& kind, int n) {
  const SynthesisProblem base = synthesis_problem(c, n, c.levels.front());
  if (kind == "widebeam") return widebeam_schedule(base, c.slots, c.blocks);
  if (kind == "sweep")
    return sweep_baseline_schedule(base.geometry, base.gains, c.levels.front(), single_interval(c), c.slots, c.blocks);
  throw std::invalid_argument("config: unknown schedule '" + kind + "'");
}

void write_roc_rows(std::ostream& out, const std::vector<RocRow>& rows) {
  for (const auto& r : rows)
    out << r.detector << ',' << r.schedule << ',' << fmt(r.snr_db) << ',' << fmt(r.point.p_fa) << ','
        << fmt(r.point.p_d) << ',' << r.trials << ',' << to_string(r.point.source) << '\n';
}

json run_experiment(const ExperimentConfig& c, OutputSet& outs) {
  json info = json::object();
  const auto kind_stream = stream_id(to_string(c.experiment));

  switch (c.experiment) {
    case ExperimentKind::Pattern: {
      const SynthesisProblem p = synthesis_problem(c, c.n.front(), c.levels.front());
      const SynthesisResult best = solve_lambda_sweep(p, c.lambdas, c.restarts);
      const SynthesisResult baseline = direct_quantize_baseline(p);
      write_pattern(outs, p, best, baseline);
      auto out = outs.open("result.csv");
      write_result_csv(out, best, evaluate_flatness(p, best.weights_projected, p.effective_eval_step()));
      outs.close(out, "result.csv");
      info["selected_lambda"] = best.lambda;
      info["selected_seed"] = best.seed;
      info["warnings"] = best.warnings;
      break;
    }
    case ExperimentKind::LambdaSweep: {
      auto out = outs.open("lambda_sweep.csv");
      out << "n,method,lambda,min_relaxed_db,min_projected_db,iterations,converged\n";
      for (int n : c.n) {
        const SynthesisProblem p = synthesis_problem(c, n, c.levels.front());
        std::vector<SynthesisResult> runs(c.lambdas.size());
        for (std::size_t i = 0; i < c.lambdas.size(); ++i) runs[i] = solve_lambda_sweep(p, {c.lambdas[i]}, c.restarts);
        for (const auto& r : runs)
          out << n << ",proposed," << fmt(r.lambda) << ',' << fmt(to_db(r.min_power_relaxed)) << ','
              << fmt(to_db(r.min_power_projected)) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
        const SynthesisResult b = direct_quantize_baseline(p);
        out << n << ",direct_quantization,0," << fmt(to_db(b.min_power_relaxed)) << ','
            << fmt(to_db(b.min_power_projected)) << ',' << b.iterations << ',' << (b.converged ? 1 : 0) << '\n';
      }
      outs.close(out, "lambda_sweep.csv");
      break;
    }
    case ExperimentKind::NSweep: {
      const Interval roi = single_interval(c);
      auto out = outs.open("n_sweep.csv");
      out << "n,target_avg_db,side_avg_db,target_min_db\n";
      json guards = json::object();
      for (int n : c.n) {
        const SynthesisProblem p = synthesis_problem(c, n, c.levels.front());
        const SynthesisResult r = solve_lambda_sweep(p, c.lambdas, c.restarts);
        const RVector target = roi_power(p, r.weights_projected, p.effective_eval_step());
        const double guard = default_grid_step(n);
        guards[std::to_string(n)] = guard;
        const auto side = side_grid(roi, guard, p.effective_eval_step());
        const RVector side_power = side.empty() ? RVector() : beam_power(p.geometry, p.gains, r.weights_projected, side);
        out << n << ',' << fmt(mean_db(target)) << ',' << fmt(side.empty() ? 0.0 : mean_db(side_power)) << ','
            << fmt(to_db(target.minCoeff())) << '\n';
      }
      outs.close(out, "n_sweep.csv");
      info["side_region"] = "[-90, 90] minus the ROI widened by one default grid step on each side";
      info["side_region_guard_deg"] = guards;
      break;
    }
    case ExperimentKind::LSweep: {
      auto out = outs.open("l_sweep.csv");
      out << "n,levels,min_projected_db\n";
      for (int n : c.n) {
        for (int levels : c.levels) {
          const SynthesisResult r = solve_lambda_sweep(synthesis_problem(c, n, levels), c.lambdas, c.restarts);
          out << n << ',' << levels << ',' << fmt(to_db(r.min_power_projected)) << '\n';
        }
        SynthesisProblem cmc = synthesis_problem(c, n, c.levels.front());
        cmc.mode = ConstraintMode::ConstantModulus;
        const SynthesisResult r = solve_lambda_sweep(cmc, c.lambdas, c.restarts);
        out << n << ",cmc," << fmt(to_db(r.min_power_projected)) << '\n';
      }
      outs.close(out, "l_sweep.csv");
      break;
    }
    case ExperimentKind::MusicMse: {
      json seeds = json::object();
      for (int n : c.n) {
        for (const auto& s : c.schedules) {
          const RisSchedule schedule = build_schedule(c, s, n);
          MseConfig m;
          m.geometry = ArrayGeometry::ula(n, c.spacing);
          m.roi = single_interval(c);
          m.snr_db = c.snr_db;
          m.trials = c.trials;
          m.bs_angle = {c.bs_angle, 0.0};
          m.seed = derive_seed(c.master_seed, kind_stream, static_cast<std::uint64_t>(n));
          seeds[std::to_string(n)] = m.seed;
          const std::string name = "music_mse_" + s + "_n" + std::to_string(n) + ".csv";
          auto out = outs.open(name);
          out << "snr_db,mse_deg2,trials\n";
          for (const auto& pt : mse_experiment(schedule, m))
            out << fmt(pt.snr_db) << ',' << fmt(pt.mse_deg2) << ',' << pt.trials << '\n';
          outs.close(out, name);
        }
      }
      info["trial_seeds"] = seeds;
      break;
    }
    case ExperimentKind::Roc:
    case ExperimentKind::FixedPfa: {
      json seeds = json::object();
      const bool fixed = c.experiment == ExperimentKind::FixedPfa;
      for (int n : c.n) {
        DetectionConfig d;
        d.geometry = ArrayGeometry::ula(n, c.spacing);
        d.roi = single_interval(c);
        d.snr_db = c.snr_db;
        d.trials = c.trials;
        d.bs_angle = {c.bs_angle, 0.0};
        d.p_fa_grid = c.p_fa_grid;
        d.seed = derive_seed(c.master_seed, kind_stream, static_cast<std::uint64_t>(n));
        seeds[std::to_string(n)] = d.seed;
        const std::string name = std::string(fixed ? "fixed_pfa" : "roc") + "_n" + std::to_string(n) + ".csv";
        auto out = outs.open(name);
        out << "detector,schedule,snr_db,p_fa,p_d,trials,source\n";
        for (const auto& s : c.schedules) {
          const RisSchedule schedule = build_schedule(c, s, n);
          write_roc_rows(out, fixed ? fixed_pfa_experiment(schedule, s, d, c.p_fa) : roc_experiment(schedule, s, d));
        }
        outs.close(out, name);
      }
      info["trial_seeds"] = seeds;
      break;
    }
  }
  return info;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

ExperimentKind parse_experiment(const std::string& text) {
  for (const auto& k : kKinds)
    if (text == k.name) return k.kind;
  throw std::invalid_argument("config: unknown experiment '" + text + "'");
}

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

const char* version_string() { return RISBEAM_VERSION; }

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: '" + key + "' " + why);
  };
  if (array != "ula" && array != "upa") fail("array", "must be \"ula\" or \"upa\"");
  if (n.empty()) fail("n", "must not be empty");
  for (int v : n)
    if (v < 1) fail("n", "entries must be >= 1");
  if (array == "upa" && (rows < 1 || cols < 1)) fail("rows", "and 'cols' must be >= 1");
  if (!(spacing > 0.0)) fail("spacing", "must be > 0");
  if (!(bs_angle >= -90.0 && bs_angle <= 90.0)) fail("bs_angle", "must lie in [-90, 90]");
  if (levels.empty()) fail("levels", "must not be empty");
  for (int l : levels)
    if (l < 2) fail("levels", "entries must be >= 2");
  parse_mode(mode);
  if (array == "ula") {
    RegionOfInterest::parse(roi);
  } else {
    RegionOfInterest::parse_rects(roi);
  }
  if (lambdas.empty()) fail("lambdas", "must not be empty");
  for (double l : lambdas)
    if (!(l >= 0.0)) fail("lambdas", "entries must be >= 0");
  if (restarts < 1) fail("restarts", "must be >= 1");
  if (grid_step < 0.0) fail("grid_step", "must be >= 0");
  if (eval_step < 0.0) fail("eval_step", "must be >= 0");
  if (!(epsilon > 0.0)) fail("epsilon", "must be > 0");
  if (max_iters < 1) fail("max_iters", "must be >= 1");
  if (slots < 2) fail("slots", "must be >= 2");
  if (blocks < 2) fail("blocks", "must be >= 2");
  if (trials < 1) fail("trials", "must be >= 1");
  if (!(p_fa > 0.0 && p_fa < 1.0)) fail("p_fa", "must lie in (0, 1)");
  if (p_fa_grid.empty()) fail("p_fa_grid", "must not be empty");
  for (double p : p_fa_grid)
    if (!(p >= 0.0 && p <= 1.0)) fail("p_fa_grid", "entries must lie in [0, 1]");
  for (const auto& s : schedules)
    if (s != "widebeam" && s != "sweep") fail("schedules", "entries must be \"widebeam\" or \"sweep\"");
  const bool mc = experiment == ExperimentKind::MusicMse || experiment == ExperimentKind::Roc ||
                  experiment == ExperimentKind::FixedPfa;
  if (mc) {
    if (array != "ula") fail("array", "must be \"ula\" for Monte Carlo experiments");
    if (snr_db.empty()) fail("snr_db", "must not be empty");
    if (schedules.empty()) fail("schedules", "must not be empty");
  }
  if (output.empty()) fail("output", "must not be empty");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  if (!doc.contains("experiment")) throw std::invalid_argument("config: missing required key 'experiment'");

  ExperimentConfig c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") c.experiment = parse_experiment(get_as<std::string>(value, key, "a string"));
    else if (key == "array") c.array = get_as<std::string>(value, key, "a string");
    else if (key == "n") c.n = get_list<int>(value, key, "an integer or a list of integers");
    else if (key == "rows") c.rows = get_as<int>(value, key, "an integer");
    else if (key == "cols") c.cols = get_as<int>(value, key, "an integer");
    else if (key == "spacing") c.spacing = get_as<double>(value, key, "a number");
    else if (key == "bs_angle") c.bs_angle = get_as<double>(value, key, "a number");
    else if (key == "levels") c.levels = get_list<int>(value, key, "an integer or a list of integers");
    else if (key == "mode") c.mode = get_as<std::string>(value, key, "a string");
    else if (key == "roi") c.roi = get_as<std::string>(value, key, "a string");
    else if (key == "lambdas") c.lambdas = get_list<double>(value, key, "a number or a list of numbers");
    else if (key == "restarts") c.restarts = get_as<int>(value, key, "an integer");
    else if (key == "grid_step") c.grid_step = get_as<double>(value, key, "a number");
    else if (key == "eval_step") c.eval_step = get_as<double>(value, key, "a number");
    else if (key == "epsilon") c.epsilon = get_as<double>(value, key, "a number");
    else if (key == "max_iters") c.max_iters = get_as<int>(value, key, "an integer");
    else if (key == "slots") c.slots = get_as<int>(value, key, "an integer");
    else if (key == "blocks") c.blocks = get_as<int>(value, key, "an integer");
    else if (key == "schedules") c.schedules = get_list<std::string>(value, key, "a string or a list of strings");
    else if (key == "snr_db") c.snr_db = get_list<double>(value, key, "a number or a list of numbers");
    else if (key == "trials") c.trials = get_as<int>(value, key, "an integer");
    else if (key == "p_fa") c.p_fa = get_as<double>(value, key, "a number");
    else if (key == "p_fa_grid") c.p_fa_grid = get_list<double>(value, key, "a number or a list of numbers");
    else if (key == "master_seed") c.master_seed = get_as<std::uint64_t>(value, key, "a non-negative integer");
    else if (key == "output") c.output = get_as<std::string>(value, key, "a string");
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["array"] = c.array;
  j["n"] = c.n;
  j["rows"] = c.rows;
  j["cols"] = c.cols;
  j["spacing"] = c.spacing;
  j["bs_angle"] = c.bs_angle;
  j["levels"] = c.levels;
  j["mode"] = c.mode;
  j["roi"] = c.roi;
  j["lambdas"] = c.lambdas;
  j["restarts"] = c.restarts;
  j["grid_step"] = c.grid_step;
  j["eval_step"] = c.eval_step;
  j["epsilon"] = c.epsilon;
  j["max_iters"] = c.max_iters;
  j["slots"] = c.slots;
  j["blocks"] = c.blocks;
  j["schedules"] = c.schedules;
  j["snr_db"] = c.snr_db;
  j["trials"] = c.trials;
  j["p_fa"] = c.p_fa;
  j["p_fa_grid"] = c.p_fa_grid;
  j["master_seed"] = c.master_seed;
  j["output"] = c.output;
  return j.dump(2);
}

SynthesisProblem synthesis_problem(const ExperimentConfig& c, int n, int levels) {
  SynthesisProblem p;
  if (c.array == "ula") {
    p.geometry = ArrayGeometry::ula(n, c.spacing);
    p.roi = RegionOfInterest::parse(c.roi);
  } else {
    p.geometry = ArrayGeometry::upa(c.rows, c.cols, c.spacing);
    p.roi = RegionOfInterest::parse_rects(c.roi);
  }
  p.gains.bs_angle = {c.bs_angle, 0.0};
  p.mode = parse_mode(c.mode);
  p.levels = levels;
  p.grid_step = c.grid_step;
  p.eval_step = c.eval_step;
  p.epsilon = c.epsilon;
  p.max_iters = c.max_iters;
  p.seed = c.master_seed;
  return p;
}

void write_pattern_csv(std::ostream& out, ArrayKind kind, std::span<const Angle> grid, const RVector& power) {
  const bool upa = kind == ArrayKind::Upa;
  out << (upa ? "theta_el_deg,theta_az_deg,power_db\n" : "angle_deg,power_db\n");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << fmt(grid[k].theta) << ',';
    if (upa) out << fmt(grid[k].azimuth) << ',';
    out << fmt(to_db(power[static_cast<Eigen::Index>(k)])) << '\n';
  }
}

void write_result_csv(std::ostream& out, const SynthesisResult& r, const Flatness& f) {
  out << "# weights\nindex,re,im,projected_phase_index\n";
  for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
    out << i << ',' << fmt(r.weights[i].real()) << ',' << fmt(r.weights[i].imag()) << ',';
    if (static_cast<std::size_t>(i) < r.projected_index.size()) out << r.projected_index[static_cast<std::size_t>(i)];
    out << '\n';
  }
  out << "# t_trace\niteration,value\n";
  for (std::size_t k = 0; k < r.t_trace.size(); ++k) out << k << ',' << fmt(r.t_trace[k]) << '\n';
  out << "# flatness\nmin_db,max_db,ripple_db\n" << fmt(f.min_db) << ',' << fmt(f.max_db) << ',' << fmt(f.ripple_db) << '\n';
}

RunReport run(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  const fs::path dir = out_dir.empty() ? fs::path(config.output) : out_dir;
  fs::create_directories(dir);
  OutputSet outs(dir);
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  try {
    json info = run_experiment(config, outs);
    RunReport report;
    report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    json manifest;
    manifest["config"] = json::parse(config_to_json(config));
    manifest["version"] = version_string();
    manifest["started_utc"] = started_utc;
    manifest["wall_clock_s"] = report.wall_clock_s;
    manifest["threads"] = max_threads();
    json files = json::array();
    for (const auto& f : outs.files()) files.push_back(f.filename().string());
    manifest["files"] = files;
    manifest["details"] = info;
    manifest["units"] = {
        {"power_db", "10 log10 |hbar^H w|^2 with unit channel gains"},
        {"snr_db", "single-element SNR |alpha beta|^2 / (N^2 sigma^2), unit pilot"},
        {"lambda", "penalty weight in units of single-element received power"},
    };
    auto out = outs.open("manifest.json");
    out << manifest.dump(2) << '\n';
    outs.close(out, "manifest.json");
    report.files = outs.files();
    return report;
  } catch (...) {
    outs.remove_all();
    throw;
  }
}

}  // namespace risbeam
