#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "csma/dynamics.hpp"
#include "csma/equilibrium.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace csma;
using testing_helpers::graph;

namespace {

NetworkSpec one_link() { return NetworkSpec::replicated(1, 1, graph(1, {})); }

}  // namespace

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.horizon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.horizon = 10.0;
  cfg.sample_times = {1.0, 0.5};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sample_times = {1.0, 11.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sample_times = {0.0, 10.0};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("throughput cache evicts the least recently used state") {
  int calls = 0;
  ThroughputCache cache(
      [&](const NetworkState& x) {
        ++calls;
        return std::vector<double>{static_cast<double>(x[0])};
      },
      2);
  CHECK(cache(NetworkState({1}))[0] == 1.0);
  CHECK(cache(NetworkState({2}))[0] == 2.0);
  CHECK(cache(NetworkState({1}))[0] == 1.0);  // hit, 1 becomes most recent
  CHECK(cache(NetworkState({3}))[0] == 3.0);  // evicts 2
  CHECK(cache.size() == 2);
  CHECK(calls == 3);
  cache(NetworkState({2}));
  CHECK(calls == 4);
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 4);
}

TEST_CASE("no arrivals: pure death process absorbs at zero") {
  const auto spec = NetworkSpec::replicated(2, 1, graph(2, {}));
  const auto p = CsmaParams::homogeneous(spec, 1.0, 1.0);
  SimConfig cfg;
  cfg.horizon = 1e4;
  cfg.initial_state = NetworkState({3, 2});
  const auto tr = simulate_separated(spec, p, TrafficSpec::from_loads({0.0, 0.0}), cfg);
  CHECK(tr.samples.back().state == NetworkState({0, 0}));
  CHECK(tr.events.departures[0] + tr.events.departures[1] == 5);
  CHECK(tr.events.arrivals[0] + tr.events.arrivals[1] == 0);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    CHECK(tr.samples[i].time > tr.samples[i - 1].time);
    CHECK(std::abs(tr.samples[i].state.total() - tr.samples[i - 1].state.total()) == 1);
  }
}

TEST_CASE("single link at large alpha behaves as an M/M/1 queue") {
  const auto spec = one_link();
  const auto p = CsmaParams::homogeneous(spec, 1.0, 1e6);
  SimConfig cfg;
  cfg.horizon = 2e5;
  cfg.seed = 42;
  const auto tr = simulate_separated(spec, p, TrafficSpec::from_loads({0.5}), cfg);
  // rho / (1 - rho) = 1.
  CHECK(tr.time_average[0] == doctest::Approx(1.0).epsilon(0.08));
  const double done = static_cast<double>(tr.events.departures[0]);
  CHECK(std::abs(tr.served_work[0] - done) / done < 0.05);
}

TEST_CASE("identical config and seed give identical trajectories") {
  const auto spec = testing_helpers::bowtie();
  const auto p = CsmaParams::homogeneous(spec, 1.0, 5.0);
  const auto traffic = TrafficSpec::from_loads({0.3, 0.3, 0.3, 0.3, 0.3});
  SimConfig cfg;
  cfg.policy = Policy::standard_infra;
  cfg.horizon = 200.0;
  cfg.seed = 9;
  cfg.scaling_n = 3;
  CHECK(simulate_separated(spec, p, traffic, cfg).to_csv() ==
        simulate_separated(spec, p, traffic, cfg).to_csv());
  CHECK(simulate_joint(spec, p, traffic, cfg).to_csv() ==
        simulate_joint(spec, p, traffic, cfg).to_csv());
  SimConfig other = cfg;
  other.seed = 10;
  CHECK(simulate_separated(spec, p, traffic, cfg).to_csv() !=
        simulate_separated(spec, p, traffic, other).to_csv());
}

TEST_CASE("joint process keeps the schedule feasible") {
  const auto spec = testing_helpers::bowtie();
  const auto p = CsmaParams::homogeneous(spec, 1.0, 2.0);
  const auto traffic = TrafficSpec::from_loads({0.3, 0.3, 0.3, 0.3, 0.3});
  for (auto pol : {Policy::standard_infra, Policy::flow_aware}) {
    SimConfig cfg;
    cfg.policy = pol;
    cfg.horizon = 300.0;
    cfg.scaling_n = 4;
    const auto tr = simulate_joint(spec, p, traffic, cfg);
    REQUIRE(tr.samples.size() > 100);
    for (const auto& s : tr.samples) {
      REQUIRE(s.schedule);
      CHECK(is_feasible(spec, *s.schedule, s.state));
    }
    CHECK(std::accumulate(tr.events.accesses.begin(), tr.events.accesses.end(), 0L) > 0);
  }
}

TEST_CASE("one packet per flow when sigma N = 1") {
  const auto spec = one_link();
  SimConfig cfg;
  cfg.horizon = 2000.0;
  const auto tr = simulate_joint(spec, CsmaParams::homogeneous(spec, 1.0, 1.0),
                                 TrafficSpec::from_loads({0.3}), cfg);
  CHECK(tr.events.packets[0] == 0);
  CHECK(tr.events.departures[0] > 100);
  SimConfig bad = cfg;
  bad.scaling_n = 1;
  CHECK_THROWS_AS(simulate_joint(spec, CsmaParams::homogeneous(spec, 1.0, 1.0),
                                 TrafficSpec::from_loads({0.3}, 0.5), bad),
                  std::invalid_argument);
}

TEST_CASE("joint process at N = 1 matches the exact two-variable chain") {
  // States (x, y), y in {0, 1}; sigma = 2 so packets end without completion
  // at rate phi / 2.
  const double lambda = 0.2, sigma = 2.0, phi = 1.0, nu = 1.5;
  const int M = 80;
  auto idx = [](int x, int y) { return 2 * x + y; };
  const int n = 2 * (M + 1);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x <= M; ++x) {
    for (int y = 0; y <= std::min(x, 1); ++y) {
      const int s = idx(x, y);
      if (x < M) Q(s, idx(x + 1, y)) += lambda;
      if (y == 0 && x > 0) Q(s, idx(x, 1)) += x * nu;
      if (y == 1) {
        Q(s, idx(x, 0)) += phi * (1.0 - 1.0 / sigma);
        Q(s, idx(x - 1, 0)) += phi / sigma;
      }
    }
  }
  for (int s = 0; s < n; ++s) Q(s, s) = -Q.row(s).sum();
  // Unreachable (0, 1) rows are zero; pin them out of the solve.
  Eigen::MatrixXd A = Q.transpose();
  A.row(n - 1).setOnes();
  A.col(idx(0, 1)).setZero();
  A(idx(0, 1), idx(0, 1)) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::VectorXd pi = A.fullPivLu().solve(b);
  double mean_x = 0.0, busy = 0.0;
  for (int x = 0; x <= M; ++x) {
    mean_x += x * (pi(idx(x, 0)) + (x > 0 ? pi(idx(x, 1)) : 0.0));
    if (x > 0) busy += pi(idx(x, 1));
  }

  const auto spec = one_link();
  const auto p = CsmaParams::uniform(spec, {phi}, {nu});
  SimConfig cfg;
  cfg.horizon = 4e5;
  cfg.seed = 77;
  const auto tr = simulate_joint(spec, p, TrafficSpec{{lambda}, {sigma}}, cfg);
  CHECK(tr.time_average[0] == doctest::Approx(mean_x).epsilon(0.06));
  CHECK(tr.served_work[0] / tr.end_time == doctest::Approx(busy * phi).epsilon(0.03));
  // Load 0.4 must be carried.
  CHECK(busy == doctest::Approx(lambda * sigma / phi).epsilon(1e-6));
}

TEST_CASE("arrival counts have Poisson mean") {
  const auto spec = NetworkSpec::replicated(2, 1, graph(2, {{1, 2}}));
  const auto p = CsmaParams::homogeneous(spec, 1.0, 1.0);
  SimConfig cfg;
  cfg.horizon = 1e4;
  cfg.scaling_n = 2;
  const TrafficSpec traffic{{0.1, 0.2}, {1.0, 1.0}};
  for (int joint = 0; joint < 2; ++joint) {
    const auto tr = joint ? simulate_joint(spec, p, traffic, cfg) : simulate_separated(spec, p, traffic, cfg);
    for (std::size_t k = 0; k < 2; ++k) {
      const double want = traffic.arrival_rate[k] * cfg.horizon;
      CHECK(std::abs(tr.events.arrivals[k] - want) < 4.0 * std::sqrt(want));
    }
  }
}

TEST_CASE("truncation guard aborts overloaded runs") {
  const auto spec = one_link();
  SimConfig cfg;
  cfg.horizon = 1e4;
  cfg.truncation_guard = 50;
  const auto tr = simulate_separated(spec, CsmaParams::homogeneous(spec, 1.0, 1.0),
                                     TrafficSpec::from_loads({3.0}), cfg);
  CHECK(tr.aborted);
  CHECK(tr.end_time < cfg.horizon);
}

TEST_CASE("sampled trajectory and CSV layout") {
  const auto spec = NetworkSpec::replicated(2, 1, graph(2, {{1, 2}}));
  SimConfig cfg;
  cfg.horizon = 10.0;
  cfg.sample_times = {0.0, 2.5, 5.0, 10.0};
  const auto tr = simulate_joint(spec, CsmaParams::homogeneous(spec, 1, 1),
                                 TrafficSpec::from_loads({0.4, 0.4}), cfg);
  REQUIRE(tr.samples.size() == 4);
  CHECK(tr.samples[3].time == 10.0);
  const auto csv = tr.to_csv();
  CHECK(csv.rfind("time,x_1,x_2,y\n", 0) == 0);
  const auto sep = simulate_separated(spec, CsmaParams::homogeneous(spec, 1, 1),
                                      TrafficSpec::from_loads({0.4, 0.4}), cfg);
  CHECK(sep.to_csv().rfind("time,x_1,x_2\n", 0) == 0);
}

TEST_CASE("exact transient law matches a matrix exponential") {
  const auto spec = NetworkSpec::replicated(2, 1, graph(2, {{1, 2}}));
  const auto p = CsmaParams::uniform(spec, {1.0, 2.0}, {2.0, 2.0});
  const TrafficSpec traffic{{0.3, 0.4}, {1.0, 1.5}};
  const NetworkState x0({1, 2});
  const double t = 3.0;
  const auto law = separated_transient_distribution(spec, p, traffic, Policy::adhoc, x0, t);
  CHECK(law.truncated_mass < 1e-10);

  const int M = 25;
  auto idx = [&](int a, int b) { return a * (M + 1) + b; };
  const int n = (M + 1) * (M + 1);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a <= M; ++a) {
    for (int b = 0; b <= M; ++b) {
      const auto phi = throughput(spec, NetworkState({a, b}), p, Policy::adhoc);
      const int s = idx(a, b);
      if (a < M) Q(s, idx(a + 1, b)) += traffic.arrival_rate[0];
      if (b < M) Q(s, idx(a, b + 1)) += traffic.arrival_rate[1];
      if (a > 0) Q(s, idx(a - 1, b)) += phi[0] / traffic.mean_flow_size[0];
      if (b > 0) Q(s, idx(a, b - 1)) += phi[1] / traffic.mean_flow_size[1];
      Q(s, s) = -Q.row(s).sum();
    }
  }
  const Eigen::MatrixXd P = (Q * t).exp();
  double tv = 0.0;
  for (int a = 0; a <= M; ++a) {
    for (int b = 0; b <= M; ++b) {
      auto it = law.probability.find(NetworkState({a, b}));
      const double got = it == law.probability.end() ? 0.0 : it->second;
      tv += std::abs(got - P(idx(1, 2), idx(a, b)));
    }
  }
  CHECK(tv / 2.0 < 1e-8);
}

TEST_CASE("time-scale distance: zero at t = 0, small when both absorb") {
  const auto spec = NetworkSpec::replicated(2, 1, graph(2, {{1, 2}}));
  const auto p = CsmaParams::homogeneous(spec, 1.0, 1.0);
  TimescaleConfig cfg;
  cfg.initial_state = NetworkState({2, 1});
  cfg.n_values = {1, 4};
  cfg.replications = 200;
  cfg.bootstrap = 50;
  cfg.t_probe = 0.0;
  for (const auto& row : timescale_convergence(spec, p, TrafficSpec::from_loads({0.3, 0.3}), cfg)) {
    CHECK(row.distance < 1e-12);
  }
  cfg.t_probe = 200.0;
  for (const auto& row : timescale_convergence(spec, p, TrafficSpec::from_loads({0.0, 0.0}), cfg)) {
    CHECK(row.distance < 1e-6);
  }
}

TEST_CASE("distance CSV layout") {
  CHECK(distance_csv({{4, 0.1, 0.05, 0.15}}).rfind("N,distance,ci_lo,ci_hi\n4,", 0) == 0);
}

TEST_CASE("throughput caps") {
  const auto spec = testing_helpers::bowtie();
  const auto caps = throughput_caps(spec, CsmaParams::homogeneous(spec, 2.0, 1.0));
  CHECK(caps == std::vector<double>(5, 2.0));
  const auto adhoc = testing_helpers::path4(2);
  CHECK(throughput_caps(adhoc, CsmaParams::homogeneous(adhoc, 1.0, 1.0)) == std::vector<double>(4, 2.0));
}
