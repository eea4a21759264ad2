#include <map>

#include "csma/scenario.hpp"

namespace csma {

namespace {

struct Entry {
  const char* name;
  const char* text;
};

// Scenario texts use the same JSON format as user files.
const Entry kLibrary[] = {
    {"fig1-adhoc", R"({
  "name": "fig1-adhoc",
  "description": "Ad-hoc network with 4 classes whose interference graph is the path 1-2-3-4, two channels",
  "classes": 4,
  "channels": 2,
  "mode": "ad_hoc",
  "graph": {"edges": [[1, 2], [2, 3], [3, 4]]},
  "csma": {"phys_rate": 1.0, "alpha": 1.0},
  "traffic": {"load": 0.5, "mean_flow_size": 1.0},
  "experiment": {"kind": "simulate", "policy": "adhoc", "horizon": 10000, "replications": 5,
                 "sample_step": 10, "sweep": {"axes": [[1, 3], [2, 4]], "max_load": 2.0}}
})"},
    {"fig2a", R"({
  "name": "fig2a",
  "description": "2-partite interference graph with C1 = {3}, C2 = {1,2,4,5}",
  "classes": 5,
  "channels": 1,
  "graph": {"edges": [[1, 3], [2, 3], [3, 4], [3, 5]]},
  "csma": {"phys_rate": 1.0, "alpha": 1.0},
  "traffic": {"load": 0.3},
  "experiment": {"kind": "simulate", "policy": "adhoc", "horizon": 10000, "replications": 5,
                 "sample_step": 10, "sweep": {"axes": [[3], [1, 2, 4, 5]]}}
})"},
    {"fig2b", R"({
  "name": "fig2b",
  "description": "Complete bipartite interference graph with C1 = {1,2,3}, C2 = {4,5,6}",
  "classes": 6,
  "channels": 1,
  "graph": {"edges": [[1, 4], [1, 5], [1, 6], [2, 4], [2, 5], [2, 6], [3, 4], [3, 5], [3, 6]]},
  "csma": {"phys_rate": 1.0, "alpha": 1.0},
  "traffic": {"load": 0.4},
  "experiment": {"kind": "simulate", "policy": "adhoc", "horizon": 10000, "replications": 5,
                 "sample_step": 10, "sweep": {"axes": [[1, 2, 3], [4, 5, 6]]}}
})"},
    {"fig2c", R"({
  "name": "fig2c",
  "description": "Complete 3-partite interference graph with C1 = {1,2}, C2 = {3,4}, C3 = {5}",
  "classes": 5,
  "channels": 1,
  "graph": {"edges": [[1, 3], [1, 4], [1, 5], [2, 3], [2, 4], [2, 5], [3, 5], [4, 5]]},
  "csma": {"phys_rate": 1.0, "alpha": 1.0},
  "traffic": {"load": 0.25},
  "experiment": {"kind": "simulate", "policy": "adhoc", "horizon": 10000, "replications": 5,
                 "sample_step": 10, "sweep": {"axes": [[1, 2, 3, 4], [5]]}}
})"},
    {"fig3-two-ap", R"({
  "name": "fig3-two-ap",
  "description": "Two access points: U1 = {2}, D1 = {1,3}, U2 = {5}, D2 = {4,6}; classes 3 and 4 interfere",
  "classes": 6,
  "channels": 2,
  "mode": "infrastructure",
  "graph": {"edges": [[1, 2], [1, 3], [2, 3], [4, 5], [4, 6], [5, 6], [3, 4]]},
  "access_points": [{"uplink": [2], "downlink": [1, 3]}, {"uplink": [5], "downlink": [4, 6]}],
  "csma": {"phys_rate": 1.0, "alpha": 1.0},
  "traffic": {"load": 0.2},
  "experiment": {"kind": "equilibrium", "policy": "standard_infra", "state": [1, 1, 1, 1, 1, 1],
                 "sweep": {"axes": [[1, 3, 4, 6], [2, 5]]}}
})"},
    {"fig4-line", R"({
  "name": "fig4-line",
  "description": "Three access points on a line, one downlink class each, a single channel",
  "classes": 3,
  "channels": 1,
  "mode": "infrastructure",
  "graph": {"edges": [[1, 2], [2, 3]]},
  "access_points": [{"downlink": [1]}, {"downlink": [2]}, {"downlink": [3]}],
  "csma": {"phys_rate": 1.0, "alpha": 1.0},
  "traffic": {"load": 0.3},
  "experiment": {"kind": "capacity-sweep", "policy": "standard_infra", "grid": 50,
                 "sweep": {"axes": [[1, 3], [2]]}}
})"},
    {"bowtie", R"({
  "name": "bowtie",
  "description": "Bow-tie network: 5 access points with one downlink class each, two channels, two triangles sharing class 3",
  "classes": 5,
  "channels": 2,
  "mode": "infrastructure",
  "graph": {"edges": [[1, 2], [1, 3], [2, 3], [3, 4], [3, 5], [4, 5]]},
  "access_points": [{"downlink": [1]}, {"downlink": [2]}, {"downlink": [3]}, {"downlink": [4]}, {"downlink": [5]}],
  "csma": {"phys_rate": 1.0, "alpha": 1e6},
  "traffic": {"load": 0.65},
  "experiment": {"kind": "equilibrium", "policy": "standard_infra", "state": [1, 1, 1, 1, 0],
                 "grid": 50, "horizon": 10000, "replications": 5, "sample_step": 10,
                 "sweep": {"axes": [[1, 2, 4, 5], [3]]}}
})"},
};

}  // namespace

std::vector<std::string> bundled_scenario_names() {
  std::vector<std::string> out;
  for (const auto& e : kLibrary) out.emplace_back(e.name);
  return out;
}

std::optional<std::string> bundled_scenario_text(const std::string& name) {
  for (const auto& e : kLibrary) {
    if (name == e.name) return std::string(e.text);
  }
  return std::nullopt;
}

std::optional<Scenario> bundled_scenario(const std::string& name) {
  if (auto text = bundled_scenario_text(name)) return parse_scenario(*text);
  return std::nullopt;
}

}  // namespace csma
