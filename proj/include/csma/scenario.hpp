#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csma/policy.hpp"
#include "csma/topology.hpp"

namespace csma {

/// Malformed scenario document: bad syntax, wrong types, missing or unknown keys.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sweep over a two-dimensional load plane: every class of axes[0] gets load
/// u, every class of axes[1] gets load v, others keep their scenario load.
struct SweepAxes {
  std::vector<std::vector<ClassIndex>> axes;
  double max_load = 1.0;

  bool operator==(const SweepAxes&) const = default;
};

/// Optional experiment settings carried by a scenario. Unset fields fall back
/// to command-line flags or built-in defaults.
struct ExperimentBlock {
  std::optional<std::string> kind;
  std::optional<Policy> policy;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<int> scaling_n;
  std::optional<std::size_t> replications;
  std::optional<std::size_t> grid;
  std::optional<std::vector<int>> state;
  std::optional<double> t_probe;
  std::optional<std::vector<int>> n_values;
  std::optional<double> sample_step;
  std::optional<SweepAxes> sweep;

  bool operator==(const ExperimentBlock&) const = default;
};

struct Scenario {
  std::string name;
  std::string description;
  NetworkSpec spec;
  CsmaParams params;
  TrafficSpec traffic;
  ExperimentBlock experiment;

  bool operator==(const Scenario& o) const {
    return name == o.name && description == o.description && spec == o.spec &&
           params == o.params && traffic == o.traffic && experiment == o.experiment;
  }
};

/// Parses a JSON scenario. Throws ParseError on malformed input and SpecError
/// on out-of-range indices or dimensions.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Canonical JSON: every field explicit, one graph per channel, 1-based classes.
std::string serialize_scenario(const Scenario& s);

/// validate_spec, validate_params and validate_traffic combined, plus checks
/// on the experiment block.
std::vector<Violation> validate_scenario(const Scenario& s);

/// Names of the bundled scenarios, in a fixed order.
std::vector<std::string> bundled_scenario_names();
/// Bundled scenario by name, or nothing.
std::optional<Scenario> bundled_scenario(const std::string& name);
/// JSON text of a bundled scenario.
std::optional<std::string> bundled_scenario_text(const std::string& name);

/// A bundled name or a file path.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace csma
