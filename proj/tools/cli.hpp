#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csma/policy.hpp"
#include "csma/scenario.hpp"

namespace csma::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kCapacityGuard = 4,
  kSolver = 5,
  kMismatch = 6,
};

inline constexpr const char* kVersion = "0.1.0";

/// Command-line values that take precedence over the scenario's experiment block.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<Policy> policy;
  std::optional<double> alpha;
  std::optional<double> horizon;
  std::optional<double> t_probe;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> replications;
  std::optional<int> scaling_n;
  std::optional<std::vector<int>> state;
};

Scenario apply_overrides(Scenario s, const Overrides& o);

/// Fills every experiment setting the run kind needs with its default, so the
/// returned scenario fully determines the run. Throws std::invalid_argument on
/// an unknown kind or a missing required setting.
Scenario effective_scenario(Scenario s, const std::string& kind);

/// Output file name -> contents.
using Outputs = std::map<std::string, std::string>;

/// Computes the result files of one run; pure given the effective scenario.
Outputs compute_outputs(const Scenario& effective, const std::string& kind);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Writes the outputs then the manifest (last) into `dir`.
void write_run(const std::filesystem::path& dir, const Scenario& effective,
               const std::string& kind, const Outputs& outputs, double wall_seconds);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace csma::cli
