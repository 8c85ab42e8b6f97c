#include <doctest.h>

#include <fstream>
#include <sstream>

#include "risbeam/harness.hpp"

using namespace risbeam;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("risbeam_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing fills defaults and accepts scalars for lists") {
  const auto c = parse_config(R"({"experiment": "n_sweep", "n": 32, "levels": [2, 4], "master_seed": 7})");
  CHECK(c.experiment == ExperimentKind::NSweep);
  CHECK(c.n == std::vector<int>{32});
  CHECK(c.levels == std::vector<int>{2, 4});
  CHECK(c.master_seed == 7);
  CHECK(c.slots == 7);
  CHECK(c.blocks == 4);
  CHECK(c.epsilon == 1e-4);
  CHECK(c.spacing == 0.5);
}

TEST_CASE("config parsing rejects bad documents with the key name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": "roc", "trails": 5})"), "config: unknown key 'trails'",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": "roc", "trials": "many"})"),
                       "config: key 'trials' must be an integer", std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"n": 4})"), "config: missing required key 'experiment'", std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "dance"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "roc", "trials": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "roc", "snr_db": []})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "pattern", "roi": "30:-30"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "roc", "array": "upa"})"), std::invalid_argument);
}

TEST_CASE("config survives a JSON round trip") {
  ExperimentConfig c;
  c.experiment = ExperimentKind::FixedPfa;
  c.n = {16, 32};
  c.snr_db = {-20, -10};
  c.master_seed = 12345678901ULL;
  const auto back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("identical configs give byte-identical CSV files") {
  ExperimentConfig c;
  c.experiment = ExperimentKind::LSweep;
  c.n = {12};
  c.levels = {2, 4};
  c.grid_step = 2.0;
  c.lambdas = {0.0, 10.0};
  const auto a = run(c, fresh_dir("det_a"));
  const auto b = run(c, fresh_dir("det_b"));
  REQUIRE(a.files.size() == 2);
  CHECK(a.files[0].filename() == "l_sweep.csv");
  CHECK(a.files[1].filename() == "manifest.json");
  CHECK(slurp(a.files[0]) == slurp(b.files[0]));
  const std::string manifest = slurp(a.files[1]);
  CHECK(manifest.find("\"version\"") != std::string::npos);
  CHECK(manifest.find("\"wall_clock_s\"") != std::string::npos);
}

TEST_CASE("Monte Carlo outputs are deterministic and carry the documented header") {
  ExperimentConfig c;
  c.experiment = ExperimentKind::MusicMse;
  c.n = {12};
  c.schedules = {"sweep"};
  c.trials = 30;
  c.snr_db = {-5, 5};
  const auto a = run(c, fresh_dir("mc_a"));
  const auto b = run(c, fresh_dir("mc_b"));
  CHECK(a.files[0].filename() == "music_mse_sweep_n12.csv");
  const std::string body = slurp(a.files[0]);
  CHECK(body.rfind("snr_db,mse_deg2,trials\n", 0) == 0);
  CHECK(body == slurp(b.files[0]));
}

TEST_CASE("pattern experiment writes pattern files and a result file") {
  ExperimentConfig c;
  c.n = {8};
  c.grid_step = 2.0;
  c.lambdas = {1.0};
  const auto r = run(c, fresh_dir("pattern"));
  std::vector<std::string> names;
  for (const auto& f : r.files) names.push_back(f.filename().string());
  CHECK(names == std::vector<std::string>{"pattern.csv", "pattern_relaxed.csv", "pattern_baseline.csv", "result.csv",
                                          "manifest.json"});
  CHECK(slurp(r.files[0]).rfind("angle_deg,power_db\n", 0) == 0);
  const std::string result = slurp(r.files[3]);
  CHECK(result.find("# weights\nindex,re,im,projected_phase_index\n") == 0);
  CHECK(result.find("# t_trace\n") != std::string::npos);
  CHECK(result.find("# flatness\nmin_db,max_db,ripple_db\n") != std::string::npos);
}

TEST_CASE("a failed run leaves no partial outputs") {
  ExperimentConfig c;
  c.experiment = ExperimentKind::LSweep;
  c.n = {8};
  c.levels = {2};
  c.grid_step = 4.0;
  const fs::path dir = fresh_dir("partial");
  fs::create_directories(dir / "manifest.json");  // a directory where the manifest should go
  CHECK_THROWS(run(c, dir));
  CHECK_FALSE(fs::exists(dir / "l_sweep.csv"));
}

TEST_CASE("number formatting is fixed") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(-15.0) == "-15");
  CHECK(fmt(1.0 / 3.0) == "0.3333333333");
}
