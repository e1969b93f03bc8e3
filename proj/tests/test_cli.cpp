#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pettis/cli.hpp"

using namespace pettis;
namespace fs = std::filesystem;

namespace {

std::string config_text(int paths, int steps, const std::string& r_value,
                        const std::string& out_dir, int seed = 20240601) {
  // Bridge times must land on grid nodes, so tiny grids use the endpoints.
  const std::string bridge = steps % 4 == 0 ? R"({"s": 0.25, "t": 0.5})" : R"({"s": 0.0, "t": 1.0})";
  std::ostringstream os;
  os << R"({
  "space":   {"dim": 3, "norm": "L2"},
  "grid":    {"T": 1.0, "steps": )"
     << steps << R"(},
  "mc":      {"paths": )"
     << paths << R"(, "seed": )" << seed << R"(},
  "process": {"psi": [[2.0], [0.0], [-1.0]], "phi": [[4.0], [0.0], [-2.0]]},
  "girsanov": {"r": )"
     << r_value << R"(},
  "bridge":  )"
     << bridge << R"(,
  "output":  {"dir": ")"
     << out_dir << R"("}
})";
  return os.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("pettis_mc_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing accepts the documented schema") {
  const ExperimentConfig c = ExperimentConfig::from_json_text(config_text(100, 64, "\"auto\"", "out"));
  CHECK(c.dim == 3);
  CHECK(c.norm == NormTag::L2);
  CHECK(c.horizon == 1.0);
  CHECK(c.steps == 64);
  CHECK(c.path_count == 100);
  CHECK(c.seed == 20240601);
  CHECK(c.r_mode == ExperimentConfig::RMode::Auto);
  CHECK(c.bridge_s == 0.25);
  CHECK(c.psi_coeffs.size() == 3);
  CHECK(c.grid().steps() == 64);
  CHECK(c.family().size() == 3);

  const ExperimentConfig cc = ExperimentConfig::from_json_text(config_text(10, 8, "0.5", "out"));
  CHECK(cc.r_mode == ExperimentConfig::RMode::Constant);
  CHECK(cc.r_constant == 0.5);
  const ExperimentConfig cp = ExperimentConfig::from_json_text(config_text(10, 8, "[0.1, 0.2]", "out"));
  CHECK(cp.r_mode == ExperimentConfig::RMode::Polynomial);
  CHECK(cp.r_coeffs.size() == 2);
}

TEST_CASE("config rejects unknown keys, missing keys, and bad values") {
  std::string good = config_text(10, 8, "\"auto\"", "out");
  CHECK_NOTHROW(ExperimentConfig::from_json_text(good));

  // Unknown keys are usage errors at every level.
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["extra"] = 1;
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["mc"]["tolerance"] = 0.1;
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["grid"].erase("T");
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  for (const char* bad : {"{", ""}) {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(bad), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["grid"]["T"] = -1.0;
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["bridge"]["s"] = 0.5;  // s >= t
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["bridge"]["t"] = 0.26;  // off-grid at steps=8
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["girsanov"]["r"] = "linear";
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
  {
    nlohmann::json j = nlohmann::json::parse(good);
    j["process"]["psi"] = {{1.0}, {0.0}};  // wrong arity for dim 3
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(j.dump()), UsageError);
  }
}

TEST_CASE("simulate writes the documented CSVs deterministically") {
  const fs::path dir = fresh_dir("simulate");
  const ExperimentConfig tiny =
      ExperimentConfig::from_json_text(config_text(1, 1, "\"auto\"", (dir / "tiny").string()));
  REQUIRE(cmd_simulate(tiny) == 0);
  const std::string paths_csv = slurp(dir / "tiny" / "paths.csv");
  CHECK(count_lines(paths_csv) == 3);  // header + 2 nodes
  CHECK(paths_csv.rfind("path_id,t,w\n", 0) == 0);
  const std::string process_csv = slurp(dir / "tiny" / "process.csv");
  CHECK(process_csv.rfind("path_id,t,coord_0,coord_1,coord_2\n", 0) == 0);
  CHECK(count_lines(process_csv) == 3);

  const ExperimentConfig small =
      ExperimentConfig::from_json_text(config_text(20, 16, "\"auto\"", (dir / "a").string()));
  REQUIRE(cmd_simulate(small) == 0);
  const ExperimentConfig again =
      ExperimentConfig::from_json_text(config_text(20, 16, "\"auto\"", (dir / "b").string()));
  REQUIRE(cmd_simulate(again) == 0);
  CHECK(slurp(dir / "a" / "paths.csv") == slurp(dir / "b" / "paths.csv"));
  CHECK(slurp(dir / "a" / "process.csv") == slurp(dir / "b" / "process.csv"));
  fs::remove_all(dir);
}

TEST_CASE("output dir can be overridden by the environment") {
  const fs::path dir = fresh_dir("envvar");
  const ExperimentConfig c =
      ExperimentConfig::from_json_text(config_text(1, 1, "\"auto\"", (dir / "ignored").string()));
  setenv(kOutputDirEnvVar, (dir / "override").c_str(), 1);
  const int rc = cmd_simulate(c);
  unsetenv(kOutputDirEnvVar);
  REQUIRE(rc == 0);
  CHECK(fs::exists(dir / "override" / "paths.csv"));
  CHECK_FALSE(fs::exists(dir / "ignored"));
  fs::remove_all(dir);
}

TEST_CASE("girsanov command writes a report and honors exit codes") {
  const fs::path dir = fresh_dir("girsanov");
  const ExperimentConfig c =
      ExperimentConfig::from_json_text(config_text(4000, 64, "\"auto\"", dir.string(), 90210));
  const int rc = cmd_girsanov(c);
  CHECK(rc == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "girsanov_report.json"));
  for (const char* key :
       {"seed", "config", "weight_mean", "ess", "drift_residual", "z_scores", "pass"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["pass"].get<bool>());
  CHECK(doc["seed"].get<std::uint64_t>() == 90210);
  CHECK(doc["config"]["girsanov"]["r"] == "auto");
  CHECK(doc["drift_residual"].get<double>() <= 1e-10);

  // Determinism: identical bytes on a re-run.
  const std::string first = slurp(dir / "girsanov_report.json");
  REQUIRE(cmd_girsanov(c) == 0);
  CHECK(first == slurp(dir / "girsanov_report.json"));
  fs::remove_all(dir);
}

TEST_CASE("girsanov command refuses non-proportional fields") {
  const fs::path dir = fresh_dir("girsanov_bad");
  std::string text = config_text(100, 16, "\"auto\"", dir.string());
  nlohmann::json j = nlohmann::json::parse(text);
  j["process"]["phi"] = {{1.0}, {1.0}, {0.0}};  // not proportional to psi
  const ExperimentConfig c = ExperimentConfig::from_json_text(j.dump());
  CHECK(cmd_girsanov(c) == 2);
  fs::remove_all(dir);
}

TEST_CASE("bridge command confirms the conditional-measure pattern") {
  const fs::path dir = fresh_dir("bridge");
  const ExperimentConfig c =
      ExperimentConfig::from_json_text(config_text(6000, 64, "\"auto\"", dir.string(), 777001));
  const int rc = cmd_bridge(c);
  CHECK(rc == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "bridge_report.json"));
  CHECK(doc.contains("bridge"));
  CHECK(doc.contains("n_check"));
  REQUIRE(doc["q_sweep"].is_array());
  REQUIRE(doc["q_sweep"].size() == 3);
  int pass_rows = 0;
  for (const auto& row : doc["q_sweep"]) {
    if (row["verdict"] == "PASS") {
      ++pass_rows;
      CHECK(row["alpha"].get<double>() == doctest::Approx(2.0));
    }
    CHECK(row["consistent_with_theory"].get<bool>());
  }
  CHECK(pass_rows == 1);
  CHECK(doc["n_check"]["verdict"] == "PASS");
  CHECK(doc["pass"].get<bool>());

  const std::string first = slurp(dir / "bridge_report.json");
  REQUIRE(cmd_bridge(c) == 0);
  CHECK(first == slurp(dir / "bridge_report.json"));
  fs::remove_all(dir);
}

TEST_CASE("validate command runs the exact suite") {
  const ExperimentConfig c = ExperimentConfig::from_json_text(config_text(1, 1, "\"auto\"", "unused"));
  CHECK(cmd_validate(c) == 0);
}

TEST_CASE("argv dispatch and usage errors") {
  {
    const char* argv[] = {"pettis_mc"};
    CHECK(run_cli(1, argv) == 2);
  }
  {
    const char* argv[] = {"pettis_mc", "frobnicate", "--config", "x.json"};
    CHECK(run_cli(4, argv) == 2);
  }
  {
    const char* argv[] = {"pettis_mc", "validate", "--config", "/nonexistent/config.json"};
    CHECK(run_cli(4, argv) == 2);
  }
  {
    const fs::path dir = fresh_dir("dispatch");
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << config_text(1, 1, "\"auto\"", dir.string());
    const std::string cfg_str = cfg.string();
    const char* argv[] = {"pettis_mc", "validate", "--config", cfg_str.c_str()};
    CHECK(run_cli(4, argv) == 0);
    fs::remove_all(dir);
  }
}

}  // TEST_SUITE
