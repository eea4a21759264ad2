#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csma/policy.hpp"
#include "csma/schedule.hpp"
#include "csma/topology.hpp"

namespace csma {

struct SimConfig {
  Policy policy = Policy::adhoc;
  /// Packet-level acceleration N of the joint process (ignored by the
  /// separated simulator).
  int scaling_n = 1;
  double horizon = 100.0;
  std::uint64_t seed = 1;
  /// Times at which the state is recorded. Empty: record every state change.
  std::vector<double> sample_times;
  /// Abort once the total number of flows exceeds this.
  long truncation_guard = 1'000'000;
  /// X(0); empty means all zeros.
  NetworkState initial_state;
  /// Y(0) for the joint process; empty schedule when unset.
  std::optional<Schedule> initial_schedule;
  /// Bound on the number of memoized phi(x) entries.
  std::size_t cache_size = 100'000;
  EnumerationLimits limits;

  /// Throws std::invalid_argument on horizon <= 0 or bad sample times.
  void validate() const;
};

struct Sample {
  double time;
  NetworkState state;
  std::optional<Schedule> schedule;
};

struct EventCounts {
  std::vector<long> arrivals;
  std::vector<long> departures;
  /// Joint process: packet transmissions that did not end their flow.
  std::vector<long> packets;
  /// Joint process: successful channel accesses.
  std::vector<long> accesses;
};

struct Trajectory {
  std::vector<Sample> samples;
  EventCounts events;
  bool aborted = false;
  /// Horizon, or the abort time.
  double end_time = 0.0;
  /// Time average of x_k over [0, end_time].
  std::vector<double> time_average;
  /// Bits served per class over [0, end_time].
  std::vector<double> served_work;

  /// "time,x_1..x_K[,y]" with y the flattened schedule when recorded.
  std::string to_csv() const;
};

/// phi(x) for a flow-level state.
using ThroughputFn = std::function<std::vector<double>(const NetworkState&)>;

/// Least-recently-used memo of phi(x).
class ThroughputCache {
 public:
  ThroughputCache(ThroughputFn fn, std::size_t capacity);
  const std::vector<double>& operator()(const NetworkState& x);
  std::size_t size() const noexcept { return index_.size(); }
  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }

 private:
  using Entry = std::pair<NetworkState, std::vector<double>>;
  ThroughputFn fn_;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<NetworkState, std::list<Entry>::iterator, NetworkStateHash> index_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Flow-level birth-death process with arrivals lambda_k and departures
/// phi_k(x)/sigma_k, simulated exactly by uniformization: candidate events
/// arrive at the constant rate sum_k lambda_k + cap_k/sigma_k, and a class-k
/// departure candidate is accepted with probability phi_k(x)/cap_k.
/// Acceptance uniforms come from per-class streams and are drawn for every
/// candidate, so two runs with the same seed and caps share their random
/// numbers event by event.
Trajectory simulate_flow_level(const ThroughputFn& phi, const std::vector<double>& rate_caps,
                               const TrafficSpec& traffic, const SimConfig& cfg);

/// Upper bound on phi_k(x): phi_k times the most channels class k can hold.
std::vector<double> throughput_caps(const NetworkSpec& spec, const CsmaParams& params);

/// Time-scale-separated model X(t); phi(x) comes from the equilibrium of the
/// configured policy and is memoized.
Trajectory simulate_separated(const NetworkSpec& spec, const CsmaParams& params,
                              const TrafficSpec& traffic, const SimConfig& cfg);

/// Joint packet/flow process (X^N, Y^N). Transitions: arrival lambda_k;
/// channel access N * activation_rate; packet end without flow completion
/// N y_kj phi_k (1 - 1/(sigma_k N)); packet end with flow completion
/// y_kj phi_k / sigma_k, releasing the slot with the flow.
Trajectory simulate_joint(const NetworkSpec& spec, const CsmaParams& params,
                          const TrafficSpec& traffic, const SimConfig& cfg);

/// Exact law of X(t) for the separated model, via uniformization on the
/// states reachable with at most `extra_arrivals` arrivals. Mass lost to the
/// truncation is returned in `truncated_mass`.
struct TransientDistribution {
  std::map<NetworkState, double> probability;
  double truncated_mass = 0.0;
};

TransientDistribution separated_transient_distribution(const NetworkSpec& spec,
                                                       const CsmaParams& params,
                                                       const TrafficSpec& traffic, Policy policy,
                                                       const NetworkState& initial, double t,
                                                       double tail_tolerance = 1e-12);

struct TimescaleConfig {
  Policy policy = Policy::adhoc;
  NetworkState initial_state;
  std::vector<int> n_values{1, 4, 16, 64};
  double t_probe = 1.0;
  std::size_t replications = 2000;
  std::uint64_t seed = 1;
  /// States with |x| above this are pooled into one bin.
  long window = 50;
  std::size_t bootstrap = 200;
};

struct DistanceRow {
  int scaling_n;
  double distance;
  double ci_lo;
  double ci_hi;
};

/// Total-variation distance between the empirical law of X^N(t_probe) and
/// the separated model's X(t_probe), for each N, with bootstrap CIs.
std::vector<DistanceRow> timescale_convergence(const NetworkSpec& spec, const CsmaParams& params,
                                               const TrafficSpec& traffic,
                                               const TimescaleConfig& cfg);

std::string distance_csv(const std::vector<DistanceRow>& rows);

}  // namespace csma
