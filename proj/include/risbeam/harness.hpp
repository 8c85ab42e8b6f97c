#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "risbeam/detection.hpp"
#include "risbeam/mm_synthesizer.hpp"

namespace risbeam {

enum class ExperimentKind { Pattern, LambdaSweep, NSweep, LSweep, MusicMse, Roc, FixedPfa };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& text);

// Field names match the JSON keys documented in docs/config.md.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Pattern;
  std::string array = "ula";      // "ula" or "upa"
  std::vector<int> n{64};         // ULA sizes; n_sweep iterates, others use every entry in turn
  int rows = 8;                   // UPA only
  int cols = 8;                   // UPA only
  double spacing = 0.5;
  double bs_angle = 0.0;
  std::vector<int> levels{4};     // l_sweep iterates, others use the first
  std::string mode = "discrete";
  std::string roi = "-30:30";     // ULA intervals or UPA rectangles
  std::vector<double> lambdas = default_lambda_sweep();
  int restarts = 1;
  double grid_step = 0.0;
  double eval_step = 0.0;
  double epsilon = 1e-4;
  int max_iters = 200;
  int slots = 7;
  int blocks = 4;
  std::vector<std::string> schedules{"widebeam", "sweep"};
  std::vector<double> snr_db{-15.0};
  int trials = 500;
  double p_fa = 0.01;
  std::vector<double> p_fa_grid{0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::uint64_t master_seed = 1;
  std::string output = "out";

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Unknown keys and wrongly typed values are rejected with the key name.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

// Single-slot synthesis problem for array size n and `levels`.
SynthesisProblem synthesis_problem(const ExperimentConfig& config, int n, int levels);

struct RunReport {
  std::vector<std::filesystem::path> files;  // CSVs, then the manifest
  double wall_clock_s = 0.0;
};

// Writes the experiment's CSV files and manifest.json under `out_dir`
// (config.output if empty). On failure every file written so far is removed
// and the exception is rethrown.
RunReport run(const ExperimentConfig& config, const std::filesystem::path& out_dir = {});

// "angle_deg,power_db" (ULA) or "theta_el_deg,theta_az_deg,power_db" (UPA).
void write_pattern_csv(std::ostream& out, ArrayKind kind, std::span<const Angle> grid, const RVector& power);

// Result file of one synthesis: "# weights" (index,re,im,projected_phase_index),
// "# t_trace" (iteration,value) and "# flatness" (min_db,max_db,ripple_db).
void write_result_csv(std::ostream& out, const SynthesisResult& result, const Flatness& flatness);

// Version string baked in at configure time.
const char* version_string();

// Fixed-precision number formatting shared by every CSV writer.
std::string fmt(double value);

}  // namespace risbeam
