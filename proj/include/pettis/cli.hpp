#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pettis/girsanov.hpp"
#include "pettis/integrate.hpp"
#include "pettis/vecspace.hpp"

namespace pettis {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitStatFail = 1;
inline constexpr int kExitUsage = 2;

// Environment variable overriding output.dir.
inline constexpr const char* kOutputDirEnvVar = "PETTIS_MC_OUTPUT_DIR";

struct ExperimentConfig {
  int dim = 0;
  NormTag norm = NormTag::L2;
  double horizon = 0.0;
  int steps = 0;
  int path_count = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> psi_coeffs;  // one coefficient list per coordinate
  std::vector<std::vector<double>> phi_coeffs;

  enum class RMode { Auto, Constant, Polynomial };
  RMode r_mode = RMode::Auto;
  double r_constant = 0.0;
  std::vector<double> r_coeffs;

  double bridge_s = 0.0;
  double bridge_t = 0.0;
  std::filesystem::path output_dir;

  // Strict parse: unknown keys anywhere are usage errors, and every invariant
  // is re-validated on load.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& file);

  TimeGrid grid() const;
  NormedSpace space() const;
  PolyVectorField psi() const;
  PolyVectorField phi() const;
  DualFamily family() const;  // triangular spanning family of size dim
  // The link field per the config: derived from the fields when "auto".
  GirsanovSetup girsanov_setup() const;
  // Output directory after the environment override.
  std::filesystem::path resolved_output_dir() const;
};

int cmd_simulate(const ExperimentConfig& config);
int cmd_girsanov(const ExperimentConfig& config);
int cmd_bridge(const ExperimentConfig& config);
int cmd_validate(const ExperimentConfig& config);

// Full argv dispatch; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace pettis
