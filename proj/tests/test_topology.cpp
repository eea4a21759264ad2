#include <algorithm>
#include <functional>
#include <random>

#include "csma/topology.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace csma;
using testing_helpers::graph;

namespace {

/// Brute force over all set partitions: does any make the graph complete multipartite?
bool multipartite_exists(const ChannelGraph& g, std::size_t K) {
  std::vector<std::vector<bool>> adj(K, std::vector<bool>(K, false));
  for (auto [a, b] : g.edges) adj[a][b] = adj[b][a] = true;
  std::vector<int> block(K, 0);
  std::function<bool(std::size_t, int)> rec = [&](std::size_t k, int used) {
    if (k == K) {
      for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a + 1; b < K; ++b) {
          if (adj[a][b] != (block[a] != block[b])) return false;
        }
      }
      return true;
    }
    for (int c = 0; c <= used; ++c) {
      block[k] = c;
      if (rec(k + 1, std::max(used, c + 1))) return true;
    }
    return false;
  };
  return rec(0, 0);
}

}  // namespace

TEST_CASE("bow-tie spec validates cleanly") {
  CHECK(validate_spec(testing_helpers::bowtie()).empty());
}

TEST_CASE("single class, single channel, no edges is valid") {
  NetworkSpec s(1, 1, {graph(1, {})});
  CHECK(validate_spec(s).empty());
}

TEST_CASE("downlink classes of one access point must conflict where they share a channel") {
  std::vector<AccessPoint> aps{{{}, {0, 1}}};
  NetworkSpec s = NetworkSpec::replicated(2, 1, graph(2, {}), Mode::infrastructure, aps);
  const auto v = validate_spec(s);
  REQUIRE(v.size() == 1);
  CHECK(v.front().message.find("access point 1") != std::string::npos);
}

TEST_CASE("a class on two access points is reported") {
  std::vector<AccessPoint> aps{{{}, {0}}, {{0}, {}}};
  NetworkSpec s = NetworkSpec::replicated(1, 1, graph(1, {}), Mode::infrastructure, aps);
  CHECK_FALSE(validate_spec(s).empty());
}

TEST_CASE("validation is idempotent") {
  std::vector<AccessPoint> aps{{{}, {0, 1}}};
  NetworkSpec s = NetworkSpec::replicated(3, 2, graph(3, {{1, 3}}), Mode::infrastructure, aps);
  const auto a = validate_spec(s), b = validate_spec(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].message == b[i].message);
}

TEST_CASE("edges are canonicalized and deduplicated") {
  ChannelGraph g = graph(3, {{2, 1}, {1, 2}, {3, 2}});
  NetworkSpec a(3, 1, {g});
  NetworkSpec b(3, 1, {graph(3, {{1, 2}, {2, 3}})});
  CHECK(a == b);
  CHECK(a.graph(0).edges == std::vector<ClassPair>{{0, 1}, {1, 2}});
  CHECK(a.conflicts(1, 0, 0));
  CHECK_FALSE(a.conflicts(0, 2, 0));
}

TEST_CASE("out-of-range indices throw at construction") {
  CHECK_THROWS_AS(NetworkSpec(2, 1, {graph(3, {})}), SpecError);
  CHECK_THROWS_AS(NetworkSpec(2, 2, {graph(2, {})}), SpecError);
  CHECK_THROWS_AS(NetworkSpec(0, 1, {}), SpecError);
  CHECK_THROWS_AS(NetworkSpec::replicated(33, 2, graph(33, {})), SpecError);
}

TEST_CASE("self-loops are violations, not exceptions") {
  ChannelGraph g = graph(2, {});
  g.edges.emplace_back(1, 1);
  NetworkSpec s(2, 1, {g});
  CHECK_FALSE(validate_spec(s).empty());
}

TEST_CASE("edge outside the eligible set is a violation") {
  ChannelGraph g;
  g.eligible = {0};
  g.edges.emplace_back(0, 1);
  NetworkSpec s(2, 1, {g});
  CHECK_FALSE(validate_spec(s).empty());
}

TEST_CASE("empty eligible set on a channel is permitted") {
  ChannelGraph unused;
  NetworkSpec s(2, 2, {graph(2, {{1, 2}}), unused});
  CHECK(validate_spec(s).empty());
  CHECK(s.channel_count(0) == 1);
}

TEST_CASE("params validation: probing must cover exactly the eligible channels") {
  ChannelGraph only_first;
  only_first.eligible = {0};
  NetworkSpec s(1, 2, {graph(1, {}), only_first});
  CsmaParams p = CsmaParams::uniform(s, {1.0}, {1.0});
  CHECK(validate_params(s, p).empty());
  CHECK(p.probe_prob[0][0] == doctest::Approx(0.5));
  p.probe_prob[0] = {1.0, 0.0};
  CHECK_FALSE(validate_params(s, p).empty());
  CsmaParams bad = CsmaParams::uniform(s, {1.0}, {0.0});
  CHECK_FALSE(validate_params(s, bad).empty());
}

TEST_CASE("traffic validation rejects negative rates and nonpositive sizes") {
  NetworkSpec s(2, 1, {graph(2, {})});
  CHECK(validate_traffic(s, TrafficSpec::from_loads({0.5, 0.0})).empty());
  CHECK_FALSE(validate_traffic(s, TrafficSpec{{-1.0, 0.0}, {1.0, 1.0}}).empty());
  CHECK_FALSE(validate_traffic(s, TrafficSpec{{1.0, 0.0}, {1.0, 0.0}}).empty());
  CHECK(TrafficSpec{{2.0, 1.0}, {0.25, 3.0}}.loads() == std::vector<double>{0.5, 3.0});
}

TEST_CASE("L-partite detection on the five-class two-block example") {
  NetworkSpec s = NetworkSpec::replicated(5, 1, graph(5, {{1, 3}, {2, 3}, {3, 4}, {3, 5}}));
  const auto p = detect_l_partite(s);
  REQUIRE(p.has_value());
  CHECK(*p == Partition{{0, 1, 3, 4}, {2}});
}

TEST_CASE("L-partite detection: edgeless graph is one block, K33 is two, bow-tie is none") {
  const auto one = detect_l_partite(NetworkSpec::replicated(4, 2, graph(4, {})));
  REQUIRE(one);
  CHECK(one->size() == 1);
  const auto two = detect_l_partite(testing_helpers::k33());
  REQUIRE(two);
  CHECK(*two == Partition{{0, 1, 2}, {3, 4, 5}});
  CHECK_FALSE(detect_l_partite(NetworkSpec::replicated(5, 2, testing_helpers::bowtie().graph(0))));
}

TEST_CASE("L-partite detection rejects differing graphs and partial eligibility") {
  NetworkSpec differ(3, 2, {graph(3, {{1, 2}}), graph(3, {{2, 3}})});
  CHECK_THROWS_AS(detect_l_partite(differ), SpecError);
  ChannelGraph partial;
  partial.eligible = {0, 1};
  CHECK_THROWS_AS(detect_l_partite(NetworkSpec(3, 1, {partial})), SpecError);
}

TEST_CASE("L-partite detection agrees with a brute-force partition search") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t K = 1 + rng() % 6;
    ChannelGraph g = graph(K, {});
    // Half the trials start from a random multipartite graph, then maybe perturb.
    std::vector<int> block(K);
    for (auto& b : block) b = static_cast<int>(rng() % 3);
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t b = a + 1; b < K; ++b) {
        const bool edge = trial % 2 ? block[a] != block[b] : rng() % 2 == 0;
        if (edge) g.edges.emplace_back(a, b);
      }
    }
    if (trial % 4 == 1 && !g.edges.empty()) g.edges.erase(g.edges.begin());
    NetworkSpec s(K, 1, {g});
    const auto p = detect_l_partite(s);
    CHECK(p.has_value() == multipartite_exists(s.graph(0), K));
    if (p) {
      for (std::size_t l = 0; l < p->size(); ++l) {
        for (std::size_t m = 0; m < p->size(); ++m) {
          for (ClassIndex a : (*p)[l]) {
            for (ClassIndex b : (*p)[m]) {
              if (a != b) CHECK(s.conflicts(a, b, 0) == (l != m));
            }
          }
        }
      }
    }
  }
}
