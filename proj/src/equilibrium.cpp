#include "csma/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace csma {

std::string to_string(Policy p) {
  switch (p) {
    case Policy::adhoc: return "adhoc";
    case Policy::standard_infra: return "standard_infra";
    case Policy::flow_aware: return "flow_aware";
  }
  return "?";
}

Policy parse_policy(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "adhoc" || s == "ad_hoc") return Policy::adhoc;
  if (s == "standard_infra" || s == "standard") return Policy::standard_infra;
  if (s == "flow_aware") return Policy::flow_aware;
  throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
}

namespace {

double log_falling_factorial(int x, std::size_t y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y; ++i) s += std::log(static_cast<double>(x) - static_cast<double>(i));
  return s;
}

double log_factorial(long n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_probe(const Schedule& y, ClassIndex k, const CsmaParams& params) {
  double s = 0.0;
  for (std::size_t j = 0; j < y.num_channels(); ++j) {
    if (y.active(k, j)) s += std::log(params.probe_prob[k][j]);
  }
  return s;
}

std::vector<long> downlink_totals(const NetworkSpec& spec, const NetworkState& x) {
  std::vector<long> tot(spec.access_points().size(), 0);
  for (std::size_t i = 0; i < tot.size(); ++i) {
    for (ClassIndex k : spec.access_points()[i].downlink) tot[i] += x[k];
  }
  return tot;
}

}  // namespace

void require_policy_applicable(const NetworkSpec& spec, const CsmaParams& params, Policy policy) {
  if (policy != Policy::standard_infra) return;
  if (spec.mode() != Mode::infrastructure) {
    throw std::invalid_argument("standard infrastructure CSMA requires an infrastructure network");
  }
  for (std::size_t i = 0; i < spec.access_points().size(); ++i) {
    const auto& d = spec.access_points()[i].downlink;
    for (ClassIndex k : d) {
      const double a = params.attempt_rate.at(k), b = params.attempt_rate.at(d.front());
      if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
        throw std::invalid_argument("access point " + std::to_string(i + 1) +
                                    ": downlink classes must share one attempt rate");
      }
    }
  }
}

double log_measure_adhoc(const NetworkState& x, const Schedule& y, const CsmaParams& params) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] <= 0) continue;
    const std::size_t yk = y.per_class(k);
    if (yk == 0) continue;
    s += log_falling_factorial(x[k], yk) + static_cast<double>(yk) * std::log(params.alpha(k)) +
         log_probe(y, k, params);
  }
  return s;
}

double log_measure_standard_infra(const NetworkSpec& spec, const NetworkState& x, const Schedule& y,
                                  const CsmaParams& params, bool reduced) {
  double s = 0.0;
  const auto totals = downlink_totals(spec, x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] <= 0) continue;
    const std::size_t yk = y.per_class(k);
    if (auto ap = spec.downlink_ap(k)) {
      if (!reduced) s -= log_factorial(x[k]);
      if (yk > 0) {
        // Flow selection with probability x_k / sum_{D_i} x; zero when the
        // access point serves a single active class.
        const double share = std::log(static_cast<double>(x[k]) / static_cast<double>(totals[*ap]));
        s += static_cast<double>(yk) * (std::log(params.alpha(k)) + share) + log_probe(y, k, params);
      }
    } else if (yk > 0) {
      s += log_falling_factorial(x[k], yk) + static_cast<double>(yk) * std::log(params.alpha(k)) +
           log_probe(y, k, params);
    }
  }
  if (!reduced) {
    for (long n : downlink_totals(spec, x)) s += log_factorial(n);
  }
  return s;
}

double log_measure(const NetworkSpec& spec, const NetworkState& x, const Schedule& y,
                   const CsmaParams& params, Policy policy) {
  return policy == Policy::standard_infra ? log_measure_standard_infra(spec, x, y, params)
                                          : log_measure_adhoc(x, y, params);
}

std::vector<LogWeight> stationary_measure_adhoc(const NetworkSpec& spec, const NetworkState& x,
                                                const CsmaParams& params,
                                                const EnumerationLimits& limits) {
  std::vector<LogWeight> out;
  for (auto& y : enumerate_feasible(spec, x, limits)) {
    const double lw = log_measure_adhoc(x, y, params);
    out.push_back({std::move(y), lw});
  }
  return out;
}

std::vector<LogWeight> stationary_measure_standard_infra(const NetworkSpec& spec,
                                                         const NetworkState& x,
                                                         const CsmaParams& params, bool reduced,
                                                         const EnumerationLimits& limits) {
  require_policy_applicable(spec, params, Policy::standard_infra);
  std::vector<LogWeight> out;
  for (auto& y : enumerate_feasible(spec, x, limits)) {
    const double lw = log_measure_standard_infra(spec, x, y, params, reduced);
    out.push_back({std::move(y), lw});
  }
  return out;
}

double activation_rate(const NetworkSpec& spec, const NetworkState& x, const Schedule& y,
                       ClassIndex k, ChannelIndex j, const CsmaParams& params, Policy policy) {
  const double nb = params.attempt_rate[k] * params.probe_prob[k][j];
  if (policy == Policy::standard_infra) {
    if (auto ap = spec.downlink_ap(k)) {
      long tot = 0;
      for (ClassIndex l : spec.access_points()[*ap].downlink) tot += x[l];
      return tot > 0 ? static_cast<double>(x[k]) / static_cast<double>(tot) * nb : 0.0;
    }
  }
  return static_cast<double>(x[k] - static_cast<int>(y.per_class(k))) * nb;
}

EquilibriumResult normalize_measure(const std::vector<LogWeight>& measure, const CsmaParams& params,
                                    std::size_t K) {
  EquilibriumResult r;
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& m : measure) mx = std::max(mx, m.log_weight);
  double z = 0.0;
  for (const auto& m : measure) z += std::exp(m.log_weight - mx);
  r.log_normalizer = mx + std::log(z);
  r.distribution.reserve(measure.size());
  for (const auto& m : measure) {
    r.distribution.push_back({m.schedule, std::exp(m.log_weight - r.log_normalizer)});
  }
  r.throughput = class_activity(r.distribution, K);
  for (std::size_t k = 0; k < K; ++k) r.throughput[k] *= params.phys_rate[k];
  return r;
}

EquilibriumResult equilibrium(const NetworkSpec& spec, const NetworkState& x,
                              const CsmaParams& params, Policy policy,
                              const EnumerationLimits& limits) {
  const auto measure = policy == Policy::standard_infra
                           ? stationary_measure_standard_infra(spec, x, params, true, limits)
                           : stationary_measure_adhoc(spec, x, params, limits);
  return normalize_measure(measure, params, spec.num_classes());
}

std::vector<double> throughput(const NetworkSpec& spec, const NetworkState& x,
                               const CsmaParams& params, Policy policy,
                               const EnumerationLimits& limits) {
  return equilibrium(spec, x, params, policy, limits).throughput;
}

double detailed_balance_residual(const NetworkSpec& spec, const NetworkState& x,
                                 const CsmaParams& params, Policy policy,
                                 const std::vector<LogWeight>& measure) {
  std::unordered_map<std::uint64_t, double> lw;
  lw.reserve(measure.size() * 2);
  for (const auto& m : measure) lw.emplace(m.schedule.mask(), m.log_weight);
  double worst = 0.0;
  for (const auto& m : measure) {
    const Schedule& y = m.schedule;
    for (std::size_t k = 0; k < spec.num_classes(); ++k) {
      for (std::size_t j = 0; j < spec.num_channels(); ++j) {
        if (y.active(k, j)) continue;
        const auto it = lw.find(y.with(k, j).mask());
        if (it == lw.end()) continue;
        const double up = activation_rate(spec, x, y, k, j, params, policy);
        const double ratio = std::exp(m.log_weight + std::log(up) - it->second -
                                      std::log(params.phys_rate[k]));
        worst = std::max(worst, std::abs(ratio - 1.0));
      }
    }
  }
  return worst;
}

double detailed_balance_check(const NetworkSpec& spec, const NetworkState& x,
                              const CsmaParams& params, Policy policy,
                              const EnumerationLimits& limits) {
  const auto measure = policy == Policy::standard_infra
                           ? stationary_measure_standard_infra(spec, x, params, false, limits)
                           : stationary_measure_adhoc(spec, x, params, limits);
  return detailed_balance_residual(spec, x, params, policy, measure);
}

Lemma1Result lemma1_check(const NetworkSpec& spec, const NetworkState& x, const CsmaParams& params,
                          Policy policy, double epsilon, const EnumerationLimits& limits) {
  if (policy == Policy::standard_infra) {
    throw std::invalid_argument("the max-weight concentration check applies to ad-hoc/flow-aware");
  }
  const auto eq = equilibrium(spec, x, params, policy, limits);
  double lhs = 0.0, best = 0.0;
  for (const auto& [y, p] : eq.distribution) {
    const double lu = log_weight_u(x, y, params);
    lhs += p * lu;
    best = std::max(best, lu);
  }
  const double rhs = (1.0 - epsilon) * best;
  return {lhs >= rhs - 1e-12 * std::max(1.0, std::abs(rhs)), lhs, rhs};
}

std::string EquilibriumResult::distribution_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "id,schedule,probability\n";
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    os << i << ',' << distribution[i].schedule.to_string() << ',' << distribution[i].probability
       << '\n';
  }
  return os.str();
}

std::string EquilibriumResult::throughput_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "class,throughput\n";
  for (std::size_t k = 0; k < throughput.size(); ++k) os << k + 1 << ',' << throughput[k] << '\n';
  return os.str();
}

}  // namespace csma
