#include <filesystem>
#include <fstream>

#include "csma/scenario.hpp"
#include "doctest.h"

using namespace csma;

namespace {

const char* kMinimal = R"({
  "name": "tiny",
  "classes": 2,
  "channels": 1,
  "graph": {"edges": [[1, 2]]},
  "traffic": {"load": [0.2, 0.3]}
})";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("minimal document gets the documented defaults") {
  const auto s = parse_scenario(kMinimal);
  CHECK(s.name == "tiny");
  CHECK(s.spec.mode() == Mode::ad_hoc);
  CHECK(s.spec.conflicts(0, 1, 0));
  CHECK(s.params.phys_rate == std::vector<double>{1.0, 1.0});
  CHECK(s.params.alpha(0) == 1.0);
  CHECK(s.params.probe_prob[1][0] == 1.0);
  CHECK(s.traffic.loads() == std::vector<double>{0.2, 0.3});
  CHECK(s.experiment == ExperimentBlock{});
  CHECK(validate_scenario(s).empty());
}

TEST_CASE("every bundled scenario parses, validates and round-trips") {
  const auto names = bundled_scenario_names();
  CHECK(names.size() == 7);
  for (const auto& name : names) {
    CAPTURE(name);
    const auto s = bundled_scenario(name);
    REQUIRE(s);
    CHECK(s->name == name);
    CHECK(validate_scenario(*s).empty());
    const std::string text = serialize_scenario(*s);
    const auto back = parse_scenario(text);
    CHECK(back == *s);
    CHECK(serialize_scenario(back) == text);
  }
  CHECK_FALSE(bundled_scenario("no-such-scenario"));
}

TEST_CASE("scenario alpha, per-channel graphs and access points") {
  const auto s = parse_scenario(R"({
    "name": "infra", "classes": 3, "channels": 2, "mode": "infrastructure",
    "graphs": [{"eligible": [1, 2, 3], "edges": [[1, 2]]}, {"eligible": [3]}],
    "access_points": [{"uplink": [1], "downlink": [2]}],
    "csma": {"phys_rate": [2, 1, 1], "alpha": 5},
    "traffic": {"arrival_rate": [0.1, 0.2, 0.3], "mean_flow_size": 2},
    "experiment": {"kind": "simulate", "policy": "flow-aware", "seed": 7, "state": [1, 0, 2],
                   "sweep": {"axes": [[1], [2, 3]], "max_load": 1.5}}
  })");
  CHECK(s.spec.mode() == Mode::infrastructure);
  CHECK_FALSE(s.spec.eligible(0, 1));
  CHECK(s.spec.eligible(2, 1));
  CHECK(s.params.attempt_rate == std::vector<double>{10, 5, 5});
  CHECK(s.params.probe_prob[2] == std::vector<double>{0.5, 0.5});
  CHECK(s.traffic.load(2) == doctest::Approx(0.6));
  CHECK(*s.experiment.policy == Policy::flow_aware);
  CHECK(*s.experiment.seed == 7);
  CHECK(s.experiment.sweep->axes == std::vector<std::vector<ClassIndex>>{{0}, {1, 2}});
  CHECK(validate_scenario(s).empty());
}

TEST_CASE("malformed documents raise ParseError") {
  const std::string base = kMinimal;
  CHECK_THROWS_AS(parse_scenario(""), ParseError);
  CHECK_THROWS_AS(parse_scenario("{"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[]"), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"name\": \"tiny\",", "")), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"channels\": 1,", "\"channels\": 1, \"colour\": 3,")), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"classes\": 2", "\"classes\": \"two\"")), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"graph\"", "\"graphs\": [], \"graph\"")), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "[0.2, 0.3]", "[0.2]")), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"load\"", "\"load\": 1, \"arrival_rate\"")), ParseError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"edges\"", "\"weights\"")), ParseError);
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/scenario.json"), ParseError);
}

TEST_CASE("out-of-range classes raise SpecError") {
  const std::string base = kMinimal;
  CHECK_THROWS_AS(parse_scenario(with(base, "[[1, 2]]", "[[0, 2]]")), SpecError);
  CHECK_THROWS_AS(parse_scenario(with(base, "[[1, 2]]", "[[1, 3]]")), SpecError);
  CHECK_THROWS_AS(parse_scenario(with(base, "\"classes\": 2", "\"classes\": 0")), SpecError);
}

TEST_CASE("structural problems are reported by validation, not parsing") {
  const auto s = parse_scenario(R"({
    "name": "bad", "classes": 2, "channels": 1, "mode": "infrastructure",
    "graph": {"edges": []},
    "access_points": [{"downlink": [1, 2]}],
    "traffic": {"load": -0.1}
  })");
  const auto v = validate_scenario(s);
  CHECK(v.size() >= 3);
}

TEST_CASE("scenario files resolve by path") {
  const auto path = std::filesystem::temp_directory_path() / "csma_test_scenario.json";
  {
    std::ofstream(path) << kMinimal;
  }
  CHECK(resolve_scenario(path.string()).name == "tiny");
  CHECK(resolve_scenario("bowtie").name == "bowtie");
  std::filesystem::remove(path);
}
