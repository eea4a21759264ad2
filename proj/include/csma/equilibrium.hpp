#pragma once

#include <string>
#include <vector>

#include "csma/policy.hpp"
#include "csma/schedule.hpp"
#include "csma/topology.hpp"

namespace csma {

/// Stationary schedule distribution pi(x, .) and the per-class mean
/// throughputs phi_k(x) = phi_k sum_y y_k pi(x, y).
struct EquilibriumResult {
  std::vector<ScheduleMass> distribution;
  std::vector<double> throughput;  // bit/s
  double log_normalizer = 0.0;

  /// "id,schedule,probability" rows followed by nothing else.
  std::string distribution_csv() const;
  /// "class,throughput" rows, classes numbered from 1.
  std::string throughput_csv() const;
};

struct LogWeight {
  Schedule schedule;
  double log_weight;
};

/// Checks that `policy` is applicable to the spec/parameters. Standard
/// infrastructure CSMA needs infrastructure mode and a common attempt rate
/// within every access point's downlink set. Throws std::invalid_argument.
void require_policy_applicable(const NetworkSpec& spec, const CsmaParams& params, Policy policy);

/// Product-form log-measure of one schedule for the ad-hoc / flow-aware
/// process: sum over x_k > 0 of log(x_k!/(x_k-y_k)!) + y_k log alpha_k
/// + sum_j y_kj log beta_kj.
double log_measure_adhoc(const NetworkState& x, const Schedule& y, const CsmaParams& params);

/// Log-measure for standard infrastructure CSMA. Classes outside every
/// downlink set get the ad-hoc factor; the downlink set D_i of access point i
/// contributes log((sum_{D_i} x_k)!) + sum_{k in D_i, x_k>0}
/// [y_k log(alpha_k x_k / sum_{D_i} x) - log x_k! + sum_j y_kj log beta_kj].
/// The x_k / sum_{D_i} x share is what the downlink local-balance equation
/// requires; it vanishes when one downlink class of the access point is active.
/// With `reduced`, the terms that depend on x only are dropped; the
/// normalized distribution is the same.
double log_measure_standard_infra(const NetworkSpec& spec, const NetworkState& x, const Schedule& y,
                                  const CsmaParams& params, bool reduced = false);

double log_measure(const NetworkSpec& spec, const NetworkState& x, const Schedule& y,
                   const CsmaParams& params, Policy policy);

std::vector<LogWeight> stationary_measure_adhoc(const NetworkSpec& spec, const NetworkState& x,
                                                const CsmaParams& params,
                                                const EnumerationLimits& limits = {});

std::vector<LogWeight> stationary_measure_standard_infra(const NetworkSpec& spec,
                                                         const NetworkState& x,
                                                         const CsmaParams& params,
                                                         bool reduced = false,
                                                         const EnumerationLimits& limits = {});

/// Rate of the packet-level transition y -> y + e_kj (the caller guarantees
/// feasibility of the target). Ad-hoc, flow-aware and uplink classes:
/// (x_k - y_k) nu_k beta_kj. Downlink classes under standard CSMA:
/// x_k / (sum_{D_i} x) nu_k beta_kj.
double activation_rate(const NetworkSpec& spec, const NetworkState& x, const Schedule& y,
                       ClassIndex k, ChannelIndex j, const CsmaParams& params, Policy policy);

/// Normalizes a log-measure (log-sum-exp) and computes throughputs.
EquilibriumResult normalize_measure(const std::vector<LogWeight>& measure, const CsmaParams& params,
                                    std::size_t K);

EquilibriumResult equilibrium(const NetworkSpec& spec, const NetworkState& x,
                              const CsmaParams& params, Policy policy,
                              const EnumerationLimits& limits = {});

/// phi(x) only.
std::vector<double> throughput(const NetworkSpec& spec, const NetworkState& x,
                               const CsmaParams& params, Policy policy,
                               const EnumerationLimits& limits = {});

/// Maximum relative residual |w(y) q(y, y+e_kj) / (w(y+e_kj) phi_k) - 1|
/// over all feasible activation pairs, for the policy's own measure.
double detailed_balance_check(const NetworkSpec& spec, const NetworkState& x,
                              const CsmaParams& params, Policy policy,
                              const EnumerationLimits& limits = {});

/// Same residual evaluated for a caller-supplied measure over Y(x).
double detailed_balance_residual(const NetworkSpec& spec, const NetworkState& x,
                                 const CsmaParams& params, Policy policy,
                                 const std::vector<LogWeight>& measure);

struct Lemma1Result {
  bool holds;
  double lhs;  // sum_y pi(x, y) log u(x, y)
  double rhs;  // (1 - epsilon) log u(x)
};

/// Evaluates sum_y pi(x,y) log u(x,y) >= (1 - epsilon) log u(x) exactly at x.
Lemma1Result lemma1_check(const NetworkSpec& spec, const NetworkState& x, const CsmaParams& params,
                          Policy policy, double epsilon, const EnumerationLimits& limits = {});

}  // namespace csma
