#include <algorithm>
#include <cmath>
#include <random>

#include "csma/equilibrium.hpp"
#include "csma/schedule.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracle/ctmc.hpp"
#include "oracle/instances.hpp"

using namespace csma;
using testing_helpers::graph;

namespace {

NetworkSpec single(std::size_t J) { return NetworkSpec::replicated(1, J, graph(1, {})); }

std::vector<std::uint64_t> masks(const std::vector<Schedule>& ys) {
  std::vector<std::uint64_t> out;
  for (const auto& y : ys) out.push_back(y.mask());
  return out;
}

/// Brute-force max of log u over a mask list; ties to the lexicographically greatest.
std::pair<double, Schedule> brute_max(const NetworkSpec& spec, const NetworkState& x,
                                      const CsmaParams& p, const std::vector<std::uint64_t>& ms) {
  std::pair<double, Schedule> best{-1.0, Schedule(spec.num_classes(), spec.num_channels())};
  for (auto m : ms) {
    Schedule y(spec.num_classes(), spec.num_channels(), m);
    const double w = log_weight_u(x, y, p);
    if (w > best.first + 1e-12 || (std::abs(w - best.first) <= 1e-12 && y > best.second)) {
      best = {w, y};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("schedule string round trip and accessors") {
  const Schedule y = Schedule::parse("10/01/11");
  CHECK(y.num_classes() == 3);
  CHECK(y.num_channels() == 2);
  CHECK(y.to_string() == "10/01/11");
  CHECK(y.per_class() == std::vector<std::size_t>{1, 1, 2});
  CHECK(y.channel_set(0) == 0b101);
  CHECK(y.channel_set(1) == 0b110);
  CHECK(y.total() == 4);
  CHECK(y.without(2, 0).with(0, 1).to_string() == "11/01/01");
  CHECK_THROWS(Schedule::parse("10/0"));
  CHECK_THROWS(Schedule::parse("12"));
}

TEST_CASE("lexicographic order follows the flattened matrix") {
  std::vector<Schedule> all;
  for (std::uint64_t m = 0; m < 64; ++m) all.emplace_back(3, 2, m);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].to_string() < all[i].to_string());
  }
}

TEST_CASE("single class on two channels with one flow has three schedules") {
  const auto ys = enumerate_feasible(single(2), NetworkState({1}));
  REQUIRE(ys.size() == 3);
  CHECK(ys[0].empty());
  CHECK(ys[1].to_string() == "01");
  CHECK(ys[2].to_string() == "10");
}

TEST_CASE("bow-tie schedule set size is frozen") {
  const auto spec = testing_helpers::bowtie();
  const auto ys = enumerate_feasible(spec);
  CHECK(ys.size() == 67);
  CHECK(ys.size() == oracle::brute_force_schedules(spec, nullptr).size());
  for (const auto& y : ys) {
    for (std::size_t k = 0; k < 5; ++k) CHECK(y.per_class(k) <= 1);
  }
}

TEST_CASE("two-block bipartite graph: schedules stay inside one block") {
  const auto ys = enumerate_feasible(testing_helpers::k33(), NetworkState({9, 9, 9, 9, 9, 9}));
  CHECK(ys.size() == 8 + 8 - 1);
  for (const auto& y : ys) {
    const auto set = y.channel_set(0);
    CHECK(((set & 0b000111) == 0 || (set & 0b111000) == 0));
  }
}

TEST_CASE("enumeration matches brute force on random instances") {
  for (const auto& inst : oracle::random_instances(80, 11)) {
    const auto got = masks(enumerate_feasible(inst.spec, inst.x));
    auto want = oracle::brute_force_schedules(inst.spec, &inst.x);
    std::vector<std::uint64_t> sorted_got = got;
    std::sort(sorted_got.begin(), sorted_got.end());
    CHECK(sorted_got == want);
    for (std::size_t i = 1; i < got.size(); ++i) {
      CHECK(Schedule(inst.spec.num_classes(), inst.spec.num_channels(), got[i - 1]) <
            Schedule(inst.spec.num_classes(), inst.spec.num_channels(), got[i]));
    }
    for (auto m : want) {
      CHECK(is_feasible(inst.spec, Schedule(inst.spec.num_classes(), inst.spec.num_channels(), m),
                        inst.x));
    }
    const auto free = masks(enumerate_feasible(inst.spec));
    CHECK(free.size() == oracle::brute_force_schedules(inst.spec, nullptr).size());
  }
}

TEST_CASE("state-free set equals the restricted set once every x_k >= J") {
  for (const auto& inst : oracle::random_instances(30, 5)) {
    NetworkState big(std::vector<int>(inst.spec.num_classes(), static_cast<int>(inst.spec.num_channels())));
    CHECK(masks(enumerate_feasible(inst.spec, big)) == masks(enumerate_feasible(inst.spec)));
  }
}

TEST_CASE("capacity guard trips on a small bound") {
  EnumerationLimits tiny{10};
  CHECK_THROWS_AS(enumerate_feasible(testing_helpers::bowtie(), std::nullopt, tiny),
                  CapacityGuardError);
}

TEST_CASE("log u hand values") {
  const auto s1 = single(1);
  CsmaParams p = CsmaParams::homogeneous(s1, 1.0, 3.0);
  CHECK(log_weight_u(NetworkState({2}), Schedule(1, 1, 0), p) == 0.0);
  CHECK(log_weight_u(NetworkState({2}), Schedule::parse("1"), p) == doctest::Approx(std::log(6.0)));

  const auto s2 = NetworkSpec::replicated(2, 2, graph(2, {}));
  CsmaParams q = CsmaParams::homogeneous(s2, 1.0, 1.0);
  CHECK(log_weight_u(NetworkState({2, 5}), Schedule::parse("10/11"), q) ==
        doctest::Approx(std::log(50.0)));
}

TEST_CASE("max weight of the empty state is the empty schedule") {
  const auto spec = testing_helpers::bowtie();
  const auto r = max_weight(spec, NetworkState::zeros(5), CsmaParams::homogeneous(spec, 1, 2),
                            WeightDomain::restricted);
  CHECK(r.log_weight == 0.0);
  CHECK(r.argmax.empty());
}

TEST_CASE("single class on two channels: tie-break and both-channel activation") {
  const auto spec = single(2);
  const auto p = CsmaParams::homogeneous(spec, 1.0, 2.0);
  // One flow: the two single-channel schedules tie; channel 1 wins.
  const auto one = max_weight(spec, NetworkState({1}), p, WeightDomain::restricted);
  CHECK(one.log_weight == doctest::Approx(std::log(2.0)));
  CHECK(one.argmax.to_string() == "10");
  // Five flows may hold both channels: u = (5*2)^2.
  const auto five = max_weight(spec, NetworkState({5}), p, WeightDomain::restricted);
  CHECK(five.log_weight == doctest::Approx(std::log(100.0)));
  CHECK(five.argmax.to_string() == "11");
}

TEST_CASE("max weight agrees with brute force, restricted and unrestricted") {
  for (const auto& inst : oracle::random_instances(60, 23)) {
    for (auto dom : {WeightDomain::restricted, WeightDomain::unrestricted}) {
      const auto r = max_weight(inst.spec, inst.x, inst.params, dom);
      const auto ms = oracle::brute_force_schedules(
          inst.spec, dom == WeightDomain::restricted ? &inst.x : nullptr);
      const auto want = brute_max(inst.spec, inst.x, inst.params, ms);
      CHECK(r.log_weight == doctest::Approx(want.first).epsilon(1e-12));
      CHECK(r.argmax == want.second);
    }
  }
}

TEST_CASE("u equals v once every x_k >= J, and the log gap is bounded") {
  for (const auto& inst : oracle::random_instances(40, 29)) {
    const std::size_t K = inst.spec.num_classes(), J = inst.spec.num_channels();
    NetworkState big(std::vector<int>(K, static_cast<int>(J) + 1));
    const auto c = lemma2_check(inst.spec, big, inst.params);
    CHECK(c.log_u == doctest::Approx(c.log_v));
    const auto d = lemma2_check(inst.spec, inst.x, inst.params);
    CHECK(d.holds);
    CHECK(d.log_v - d.log_u <= d.log_bound + 1e-12);
    CHECK(d.log_v >= d.log_u);
  }
}

TEST_CASE("alpha-limit distribution on the bow-tie") {
  const auto spec = testing_helpers::bowtie();
  const auto p = CsmaParams::homogeneous(spec, 1.0, 1e6);
  for (auto policy : {Policy::standard_infra, Policy::flow_aware}) {
    const auto d = alpha_limit_distribution(spec, NetworkState({1, 1, 1, 1, 0}), p, policy);
    CHECK(d.size() == 8);
    for (const auto& m : d) CHECK(m.schedule.total() == 3);
    const auto a = class_activity(d, 5);
    CHECK(a[0] == doctest::Approx(0.75));
    CHECK(a[1] == doctest::Approx(0.75));
    CHECK(a[2] == doctest::Approx(0.5));
    CHECK(a[3] == doctest::Approx(1.0));
    CHECK(a[4] == doctest::Approx(0.0));

    const auto e = class_activity(alpha_limit_distribution(spec, NetworkState({1, 1, 0, 1, 1}), p, policy), 5);
    CHECK(e == std::vector<double>{1, 1, 0, 1, 1});
  }
}

TEST_CASE("alpha-limit rows of the bow-tie throughput table") {
  const auto spec = testing_helpers::bowtie();
  const auto p = CsmaParams::homogeneous(spec, 1.0, 1e6);
  struct Row {
    std::vector<int> x;
    std::vector<double> want;
  };
  // Derived by hand: two channels, class 3 conflicts with everyone, each access
  // point transmits on at most one channel.
  const std::vector<Row> rows{
      {{1, 1, 0, 1, 1}, {1, 1, 0, 1, 1}},
      {{1, 1, 1, 1, 0}, {0.75, 0.75, 0.5, 1, 0}},
      {{1, 1, 1, 0, 0}, {2.0 / 3, 2.0 / 3, 2.0 / 3, 0, 0}},
      {{1, 0, 1, 0, 0}, {1, 0, 1, 0, 0}},
      {{0, 0, 1, 0, 0}, {0, 0, 1, 0, 0}},
      {{1, 1, 1, 1, 1}, {1, 1, 0, 1, 1}},
  };
  for (const auto& r : rows) {
    CAPTURE(NetworkState(r.x).to_string());
    const auto a = class_activity(alpha_limit_distribution(spec, NetworkState(r.x), p, Policy::flow_aware), 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(a[k] == doctest::Approx(r.want[k]));
    const auto eq = throughput(spec, NetworkState(r.x), p, Policy::flow_aware);
    for (std::size_t k = 0; k < 5; ++k) CHECK(eq[k] == doctest::Approx(r.want[k]).epsilon(1e-3));
  }
}

TEST_CASE("single class on one channel: alpha limit is the active point mass") {
  const auto spec = single(1);
  const auto d = alpha_limit_distribution(spec, NetworkState({4}), CsmaParams::homogeneous(spec, 1, 5),
                                          Policy::adhoc);
  REQUIRE(d.size() == 1);
  CHECK(d[0].schedule.to_string() == "1");
  CHECK(d[0].probability == 1.0);
}

TEST_CASE("alpha limit requires a common alpha") {
  const auto spec = NetworkSpec::replicated(2, 1, graph(2, {}));
  CsmaParams p = CsmaParams::uniform(spec, {1.0, 1.0}, {2.0, 3.0});
  CHECK_THROWS_AS(alpha_limit_distribution(spec, NetworkState({1, 1}), p, Policy::adhoc),
                  std::invalid_argument);
}
