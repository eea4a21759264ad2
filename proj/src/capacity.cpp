#include "csma/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace csma {

std::string to_string(RegionStatus s) {
  switch (s) {
    case RegionStatus::interior: return "interior";
    case RegionStatus::boundary: return "boundary";
    case RegionStatus::exterior: return "exterior";
  }
  return "?";
}

CapacityVerdict membership(const std::vector<double>& rho, const NetworkSpec& spec,
                           const CsmaParams& params, const EnumerationLimits& limits,
                           const SimplexOptions& lp_options) {
  const std::size_t K = spec.num_classes();
  if (rho.size() != K) throw std::invalid_argument("load vector must have one entry per class");
  for (double r : rho) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("loads must be nonnegative");
  }
  const auto schedules = enumerate_feasible(spec, std::nullopt, limits);

  CapacityVerdict v;
  std::vector<std::size_t> loaded;
  for (std::size_t k = 0; k < K; ++k) {
    if (rho[k] > 0.0) loaded.push_back(k);
  }
  if (loaded.empty()) {
    v.status = RegionStatus::interior;
    v.scale = v.margin = std::numeric_limits<double>::infinity();
    v.certificate.push_back({schedules.front(), 1.0});
    return v;
  }

  // Only the per-class activity vector of a schedule matters; one column per
  // distinct vector, represented by its first schedule in lexicographic order.
  std::map<std::vector<std::size_t>, std::size_t> column_of;
  std::vector<std::size_t> representative;
  for (std::size_t i = 0; i < schedules.size(); ++i) {
    if (column_of.emplace(schedules[i].per_class(), representative.size()).second) {
      representative.push_back(i);
    }
  }
  const std::size_t n = representative.size();

  // Variables (pi_1..pi_n, t). Sum pi <= 1 is equivalent to = 1 because the
  // empty schedule absorbs any remainder.
  LinearProgram lp;
  lp.c.assign(n + 1, 0.0);
  lp.c[n] = 1.0;
  lp.A.emplace_back(n + 1, 1.0);
  lp.A.back()[n] = 0.0;
  lp.b.push_back(1.0);
  for (std::size_t k : loaded) {
    std::vector<double> row(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = -params.phys_rate[k] * static_cast<double>(schedules[representative[c]].per_class(k));
    }
    row[n] = rho[k];
    lp.A.push_back(std::move(row));
    lp.b.push_back(0.0);
  }

  const LpSolution sol = solve_simplex(lp, lp_options);
  if (sol.status != LpStatus::optimal) {
    throw SolverError(sol.status == LpStatus::unbounded ? "capacity LP reported unbounded"
                                                        : "capacity LP hit the iteration limit");
  }
  v.scale = sol.objective;
  v.margin = v.scale - 1.0;
  if (std::abs(v.margin) <= kBoundaryBand) {
    v.status = RegionStatus::boundary;
  } else {
    v.status = v.margin > 0.0 ? RegionStatus::interior : RegionStatus::exterior;
  }

  double used = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double p = std::max(0.0, sol.z[c]);
    if (p > 0.0) {
      v.certificate.push_back({schedules[representative[c]], p});
      used += p;
    }
  }
  if (used < 1.0) {
    const Schedule& idle = schedules.front();
    auto it = std::find_if(v.certificate.begin(), v.certificate.end(),
                           [&](const ScheduleMass& m) { return m.schedule == idle; });
    if (it == v.certificate.end()) {
      v.certificate.insert(v.certificate.begin(), {idle, 1.0 - used});
    } else {
      it->probability += 1.0 - used;
    }
  }
  std::sort(v.certificate.begin(), v.certificate.end(),
            [](const ScheduleMass& a, const ScheduleMass& b) { return a.schedule < b.schedule; });
  return v;
}

std::vector<ScheduleMass> full_support_certificate(const CapacityVerdict& verdict,
                                                   const NetworkSpec& spec,
                                                   const EnumerationLimits& limits) {
  if (verdict.status != RegionStatus::interior) {
    throw std::invalid_argument("full-support certificates exist only for interior loads");
  }
  const auto schedules = enumerate_feasible(spec, std::nullopt, limits);
  const double w = std::min(verdict.margin / 2.0, 1e-3);
  std::map<Schedule, double> mass;
  for (const auto& y : schedules) mass[y] = w / static_cast<double>(schedules.size());
  for (const auto& [y, p] : verdict.certificate) mass[y] += (1.0 - w) * p;
  std::vector<ScheduleMass> out;
  out.reserve(mass.size());
  for (const auto& [y, p] : mass) out.push_back({y, p});
  return out;
}

double lpartite_load(const std::vector<double>& rho, const Partition& partition,
                     const CsmaParams& params) {
  double sum = 0.0;
  for (const auto& block : partition) {
    double mx = 0.0;
    for (ClassIndex k : block) mx = std::max(mx, rho.at(k) / params.phys_rate.at(k));
    sum += mx;
  }
  return sum;
}

LPartiteVerdict lpartite_condition(const std::vector<double>& rho, const NetworkSpec& spec,
                                   const CsmaParams& params) {
  const auto partition = detect_l_partite(spec);
  if (!partition) throw SpecError("conflict graph is not complete multipartite");
  const double slack = static_cast<double>(spec.num_channels()) - lpartite_load(rho, *partition, params);
  return {slack > 0.0, slack};
}

}  // namespace csma
