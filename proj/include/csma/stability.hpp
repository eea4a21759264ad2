#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "csma/dynamics.hpp"
#include "csma/policy.hpp"
#include "csma/schedule.hpp"
#include "csma/topology.hpp"

namespace csma {

struct DriftReport {
  NetworkState state;
  double delta_f;
  double g_part;
  double h_part;
};

/// F(x) = sum_{k: x_k > 0} (x_k sigma_k / phi_k) log(x_k alpha_k).
double lyapunov_f(const NetworkState& x, const CsmaParams& params, const TrafficSpec& traffic);

/// Drift of F under the separated flow-level generator. delta_f is computed
/// from F differences, g_part and h_part from the closed-form split.
DriftReport lyapunov_drift(const NetworkState& x, const CsmaParams& params,
                           const TrafficSpec& traffic, const NetworkSpec& spec, Policy policy,
                           const EnumerationLimits& limits = {});

/// Explicit bound on |H(x)|: sum_k (rho_k/phi_k) max(2, |log alpha_k|) + K J.
double drift_h_bound(const NetworkSpec& spec, const CsmaParams& params, const TrafficSpec& traffic);

enum class Evidence { stable, unstable, inconclusive };
std::string to_string(Evidence e);

struct SlopeOptions {
  /// Fit window: the last `fit_fraction` of each run.
  double fit_fraction = 0.6;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 1;
  /// Stable-evidence needs runs at least this long.
  double min_horizon = 0.0;
  /// Stable-evidence needs every time-average total queue below this.
  double queue_bound = std::numeric_limits<double>::infinity();
};

struct StabilityVerdict {
  Evidence verdict = Evidence::inconclusive;
  /// Mean least-squares slope of the total queue, flows/s.
  double slope = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<double> per_class_slopes;
  /// Largest time-average total queue among the runs.
  double max_time_average = 0.0;
  std::size_t aborted = 0;
};

/// Least-squares slope of y against t.
double ls_slope(const std::vector<double>& t, const std::vector<double>& y);

/// Slope-based verdict from at least five replications. Unstable when the
/// bootstrap CI lies above zero. Stable when no run aborted, the runs are
/// long enough, time-average queues are below the bound, and the whole CI
/// lies within +-queue_bound/horizon. Inconclusive otherwise.
StabilityVerdict fluid_slope(const std::vector<Trajectory>& runs, const SlopeOptions& options = {});

/// Heuristic bound 50 K max(1, f/(1-f)) on the total queue at load fraction
/// f = 1/scale of the capacity region.
double heuristic_queue_bound(std::size_t K, double capacity_scale);

/// Longest mean flow service time sigma_k / phi_k.
double max_service_time(const CsmaParams& params, const TrafficSpec& traffic);

/// Runs `replications` independent copies with seeds derived from cfg.seed.
std::vector<Trajectory> simulate_replications(
    const std::function<Trajectory(const SimConfig&)>& simulate, const SimConfig& cfg,
    std::size_t replications);

/// Bow-tie boundaries with phi = 1 and symmetric edge loads rho_1.
/// Standard CSMA (rho_3 above this is unstable): the class-3 throughput
/// averaged over independent edge queues busy with probability rho_1.
double csma_critical_rho3(double rho1);
/// Capacity-region bound min(1, 2 - 2 rho_1), clamped at 0.
double optimal_critical_rho3(double rho1);
/// Root of rho = csma_critical_rho3(rho) in [0, 1], by bisection.
double bowtie_fixed_point(double tol = 1e-9);

struct BoundaryRow {
  double rho1;
  double csma_rho3;
  double optimal_rho3;
};
std::vector<BoundaryRow> bowtie_boundary(const std::vector<double>& rho1_grid);
std::string boundary_csv(const std::vector<BoundaryRow>& rows);

struct Mm1Options {
  double rho1 = 0.5;
  double rho3 = 0.5;
  double horizon = 20000.0;
  std::uint64_t seed = 1;
  /// Burn-in excluded from the stationary statistics.
  double burn_in = 100.0;
  /// Allowed TV distance between the empirical edge-queue law and geometric(rho_1).
  double tv_tolerance = 0.05;
  /// Allowed |correlation| between pairs of edge queues.
  double correlation_tolerance = 0.05;
  /// Horizon and sample step for the coupled paired runs.
  double coupling_horizon = 200.0;
  double coupling_step = 0.05;
  Policy policy = Policy::standard_infra;
};

struct Mm1Report {
  /// P(x_k > 0) for the edge classes 1, 2, 4, 5.
  std::vector<double> busy_fraction;
  std::vector<double> tv_to_geometric;
  double max_abs_correlation = 0.0;
  std::size_t coupling_violations = 0;
  std::size_t coupling_checks = 0;
  /// Class-3 slope of the dominating system over the run.
  double class3_slope = 0.0;
  bool holds = false;
};

/// Simulates the dominating system (edge queues served at full rate when
/// nonempty, class 3 at its policy throughput) on the bow-tie spec, checks
/// the edge queues against independent M/M/1 queues with load rho_1, and
/// spot-checks the pathwise domination against the original system using
/// shared random numbers.
Mm1Report mm1_reduction_check(const NetworkSpec& bowtie, const CsmaParams& params,
                              const Mm1Options& options);

/// W = sum_l max_{k in C_l} x_k sigma_k / phi_k.
double w_statistic(const NetworkState& x, const Partition& partition, const CsmaParams& params,
                   const TrafficSpec& traffic);

struct FluidBoundReport {
  /// Drain time 1 / (J - sum_l max rho_k / phi_k).
  double drain_time;
  /// Scaled time at which the check is made: drain_time (1 + tolerance).
  double check_time;
  /// Mean over runs of W(check_time) / W(0).
  double residual;
  /// Mean over runs of max_t (W(t)/W(0) - max(0, 1 - t/drain_time)).
  double max_excess;
  bool holds;
};

/// Checks the fluid bound on runs started from a state with W(0) = scale.
/// Real time t corresponds to scaled time t / scale.
FluidBoundReport lpartite_fluid_bound(const std::vector<Trajectory>& runs,
                                      const Partition& partition, const CsmaParams& params,
                                      const TrafficSpec& traffic, std::size_t num_channels,
                                      double scale, double tolerance = 0.2,
                                      double threshold = 0.05);

}  // namespace csma
