#include "csma/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csma/capacity.hpp"
#include "csma/equilibrium.hpp"
#include "csma/parallel.hpp"
#include "csma/rng.hpp"

namespace csma {

namespace {

// n log(n a) with 0 log 0 = 0.
double nlog(double n, double a) { return n > 0.0 ? n * std::log(n * a) : 0.0; }

double f_term(int n, std::size_t k, const CsmaParams& params, const TrafficSpec& traffic) {
  return traffic.mean_flow_size[k] / params.phys_rate[k] * nlog(n, params.alpha(k));
}

}  // namespace

double lyapunov_f(const NetworkState& x, const CsmaParams& params, const TrafficSpec& traffic) {
  double f = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) f += f_term(x[k], k, params, traffic);
  return f;
}

DriftReport lyapunov_drift(const NetworkState& x, const CsmaParams& params,
                           const TrafficSpec& traffic, const NetworkSpec& spec, Policy policy,
                           const EnumerationLimits& limits) {
  const std::size_t K = spec.num_classes();
  const auto phi_x = throughput(spec, x, params, policy, limits);
  DriftReport r{x, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < K; ++k) {
    const double lam = traffic.arrival_rate[k], sigma = traffic.mean_flow_size[k];
    const double phi = params.phys_rate[k], alpha = params.alpha(k);
    const double rho = lam * sigma;
    const double fk = f_term(x[k], k, params, traffic);
    r.delta_f += lam * (f_term(x[k] + 1, k, params, traffic) - fk);
    if (x[k] == 0) {
      r.h_part += rho / phi * std::log(alpha);
      continue;
    }
    const double n = x[k];
    r.delta_f += phi_x[k] / sigma * (f_term(x[k] - 1, k, params, traffic) - fk);
    r.g_part += (rho - phi_x[k]) / phi * std::log(n * alpha);
    r.h_part += rho / phi * (n + 1.0) * std::log1p(1.0 / n);
    if (x[k] > 1) r.h_part += phi_x[k] / phi * (n - 1.0) * std::log1p(-1.0 / n);
  }
  return r;
}

double drift_h_bound(const NetworkSpec& spec, const CsmaParams& params, const TrafficSpec& traffic) {
  double b = 0.0;
  for (std::size_t k = 0; k < spec.num_classes(); ++k) {
    b += traffic.load(k) / params.phys_rate[k] * std::max(2.0, std::abs(std::log(params.alpha(k))));
  }
  return b + static_cast<double>(spec.num_classes() * spec.num_channels());
}

std::string to_string(Evidence e) {
  switch (e) {
    case Evidence::stable: return "stable-evidence";
    case Evidence::unstable: return "unstable-evidence";
    case Evidence::inconclusive: return "inconclusive";
  }
  return "?";
}

double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 2 || y.size() != n) return std::nan("");
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (t[i] - mt) * (y[i] - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

StabilityVerdict fluid_slope(const std::vector<Trajectory>& runs, const SlopeOptions& options) {
  if (runs.size() < 5) throw std::invalid_argument("fluid_slope needs at least 5 replications");
  const std::size_t K = runs.front().time_average.size();
  StabilityVerdict v;
  v.per_class_slopes.assign(K, 0.0);
  std::vector<double> slopes;
  bool fit_ok = true;
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    if (run.aborted) ++v.aborted;
    shortest = std::min(shortest, run.end_time);
    v.max_time_average = std::max(
        v.max_time_average, std::accumulate(run.time_average.begin(), run.time_average.end(), 0.0));
    const double from = (1.0 - options.fit_fraction) * run.end_time;
    std::vector<double> t, total;
    std::vector<std::vector<double>> per(K);
    for (const auto& s : run.samples) {
      if (s.time < from) continue;
      t.push_back(s.time);
      total.push_back(static_cast<double>(s.state.total()));
      for (std::size_t k = 0; k < K; ++k) per[k].push_back(s.state[k]);
    }
    double slope = ls_slope(t, total);
    if (std::isnan(slope)) {
      // Fewer than two distinct sample times: a frozen state has zero slope.
      if (!t.empty() && !run.aborted) {
        slope = 0.0;
      } else {
        fit_ok = false;
        slope = 0.0;
      }
    }
    slopes.push_back(slope);
    for (std::size_t k = 0; k < K; ++k) {
      const double sk = ls_slope(t, per[k]);
      v.per_class_slopes[k] += std::isnan(sk) ? 0.0 : sk / static_cast<double>(runs.size());
    }
  }
  const auto mean = [](const std::vector<double>& a) {
    return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  };
  v.slope = mean(slopes);

  CounterRng rng(options.seed, stream_id(StreamKind::bootstrap));
  std::vector<double> boot(std::max<std::size_t>(options.bootstrap, 1));
  std::vector<double> pick(slopes.size());
  for (auto& b : boot) {
    for (auto& p : pick) p = slopes[rng.below(slopes.size())];
    b = mean(pick);
  }
  std::sort(boot.begin(), boot.end());
  const auto quant = [&](double q) {
    return boot[static_cast<std::size_t>(q * static_cast<double>(boot.size() - 1))];
  };
  v.ci_lo = quant(0.025);
  v.ci_hi = quant(0.975);

  const double band = options.queue_bound / shortest;
  if (!fit_ok) {
    v.verdict = Evidence::inconclusive;
  } else if (v.ci_lo > 0.0) {
    v.verdict = Evidence::unstable;
  } else if (v.aborted == 0 && shortest >= options.min_horizon &&
             v.max_time_average < options.queue_bound && v.ci_lo >= -band && v.ci_hi <= band) {
    v.verdict = Evidence::stable;
  } else {
    v.verdict = Evidence::inconclusive;
  }
  return v;
}

double heuristic_queue_bound(std::size_t K, double capacity_scale) {
  if (!(capacity_scale > 1.0)) return 0.0;
  const double f = 1.0 / capacity_scale;
  return 50.0 * static_cast<double>(K) * std::max(1.0, f / (1.0 - f));
}

double max_service_time(const CsmaParams& params, const TrafficSpec& traffic) {
  double m = 0.0;
  for (std::size_t k = 0; k < params.phys_rate.size(); ++k) {
    m = std::max(m, traffic.mean_flow_size[k] / params.phys_rate[k]);
  }
  return m;
}

std::vector<Trajectory> simulate_replications(
    const std::function<Trajectory(const SimConfig&)>& simulate, const SimConfig& cfg,
    std::size_t replications) {
  std::vector<Trajectory> out(replications);
  parallel_for(replications, [&](std::size_t r) {
    SimConfig c = cfg;
    c.seed = derive_seed(cfg.seed, r);
    out[r] = simulate(c);
  });
  return out;
}

double csma_critical_rho3(double r) {
  const double p = r * r * r * r / 3.0 - 2.0 * r * r * r / 3.0 - 2.0 * r * r / 3.0 + 1.0;
  return std::max(0.0, p);
}

double optimal_critical_rho3(double rho1) { return std::clamp(2.0 - 2.0 * rho1, 0.0, 1.0); }

double bowtie_fixed_point(double tol) {
  double lo = 0.0, hi = 1.0;  // g(lo) > 0 > g(hi) for g(r) = p(r) - r
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (csma_critical_rho3(mid) - mid > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<BoundaryRow> bowtie_boundary(const std::vector<double>& rho1_grid) {
  std::vector<BoundaryRow> rows;
  rows.reserve(rho1_grid.size());
  for (double r : rho1_grid) {
    if (!(r >= 0.0)) throw std::invalid_argument("rho_1 must be nonnegative");
    rows.push_back({r, csma_critical_rho3(r), optimal_critical_rho3(r)});
  }
  return rows;
}

std::string boundary_csv(const std::vector<BoundaryRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "rho1,eq12_rho3,eq11_rho3\n";
  for (const auto& r : rows) os << r.rho1 << ',' << r.csma_rho3 << ',' << r.optimal_rho3 << '\n';
  return os.str();
}

Mm1Report mm1_reduction_check(const NetworkSpec& bowtie, const CsmaParams& params,
                              const Mm1Options& opt) {
  const std::size_t K = bowtie.num_classes();
  if (K != 5) throw std::invalid_argument("the M/M/1 reduction applies to the 5-class bow-tie");
  constexpr std::size_t center = 2;
  const std::vector<std::size_t> edges{0, 1, 3, 4};

  TrafficSpec traffic;
  traffic.mean_flow_size.assign(K, 1.0);
  traffic.arrival_rate.assign(K, opt.rho1);
  traffic.arrival_rate[center] = opt.rho3;

  auto caps = throughput_caps(bowtie, params);
  for (std::size_t k = 0; k < K; ++k) caps[k] = std::max(caps[k], params.phys_rate[k]);

  ThroughputCache phi(
      [&](const NetworkState& x) { return throughput(bowtie, x, params, opt.policy); }, 100'000);
  const ThroughputFn original = [&](const NetworkState& x) { return phi(x); };
  const ThroughputFn dominating = [&](const NetworkState& x) {
    auto r = phi(x);
    for (std::size_t k : edges) r[k] = x[k] > 0 ? params.phys_rate[k] : 0.0;
    return r;
  };

  Mm1Report rep;
  SimConfig cfg;
  cfg.policy = opt.policy;
  cfg.horizon = opt.horizon;
  cfg.seed = opt.seed;
  const Trajectory run = simulate_flow_level(dominating, caps, traffic, cfg);

  // Time-weighted statistics after burn-in.
  const std::size_t E = edges.size();
  std::vector<std::vector<double>> hist(E);
  std::vector<double> mean(E, 0.0), busy(E, 0.0);
  std::vector<std::vector<double>> cross(E, std::vector<double>(E, 0.0));
  double weight = 0.0;
  std::vector<double> t3, x3;
  for (std::size_t i = 0; i < run.samples.size(); ++i) {
    const double t0 = std::max(run.samples[i].time, opt.burn_in);
    const double t1 = i + 1 < run.samples.size() ? run.samples[i + 1].time : run.end_time;
    if (run.samples[i].time >= 0.5 * run.end_time) {
      t3.push_back(run.samples[i].time);
      x3.push_back(run.samples[i].state[center]);
    }
    const double dt = t1 - t0;
    if (dt <= 0.0) continue;
    const auto& x = run.samples[i].state;
    weight += dt;
    for (std::size_t a = 0; a < E; ++a) {
      const int n = x[edges[a]];
      if (hist[a].size() <= static_cast<std::size_t>(n)) hist[a].resize(n + 1, 0.0);
      hist[a][n] += dt;
      mean[a] += dt * n;
      if (n > 0) busy[a] += dt;
      for (std::size_t b = 0; b < E; ++b) cross[a][b] += dt * n * x[edges[b]];
    }
  }
  if (!(weight > 0.0)) throw std::invalid_argument("horizon must exceed the burn-in");
  rep.class3_slope = ls_slope(t3, x3);
  if (std::isnan(rep.class3_slope)) rep.class3_slope = 0.0;

  bool ok = !run.aborted;
  for (std::size_t a = 0; a < E; ++a) {
    mean[a] /= weight;
    rep.busy_fraction.push_back(busy[a] / weight);
    const double r = opt.rho1 / params.phys_rate[edges[a]];
    double tv = 0.0, covered = 0.0;
    for (std::size_t n = 0; n < hist[a].size(); ++n) {
      const double g = (1.0 - r) * std::pow(r, static_cast<double>(n));
      tv += std::abs(hist[a][n] / weight - g);
      covered += g;
    }
    tv = 0.5 * (tv + std::max(0.0, 1.0 - covered));
    rep.tv_to_geometric.push_back(tv);
    ok = ok && tv <= opt.tv_tolerance;
  }
  for (std::size_t a = 0; a < E; ++a) {
    for (std::size_t b = a + 1; b < E; ++b) {
      const double va = cross[a][a] / weight - mean[a] * mean[a];
      const double vb = cross[b][b] / weight - mean[b] * mean[b];
      const double cov = cross[a][b] / weight - mean[a] * mean[b];
      const double corr = va > 0.0 && vb > 0.0 ? cov / std::sqrt(va * vb) : 0.0;
      rep.max_abs_correlation = std::max(rep.max_abs_correlation, std::abs(corr));
    }
  }
  ok = ok && rep.max_abs_correlation <= opt.correlation_tolerance;

  // Coupled runs: same seed and caps, so both consume the same random numbers.
  SimConfig pc;
  pc.policy = opt.policy;
  pc.horizon = opt.coupling_horizon;
  pc.seed = derive_seed(opt.seed, 0xc0);
  for (double t = opt.coupling_step; t <= opt.coupling_horizon; t += opt.coupling_step) {
    pc.sample_times.push_back(t);
  }
  const Trajectory low = simulate_flow_level(dominating, caps, traffic, pc);
  const Trajectory high = simulate_flow_level(original, caps, traffic, pc);
  const std::size_t n = std::min(low.samples.size(), high.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    ++rep.coupling_checks;
    for (std::size_t k = 0; k < K; ++k) {
      if (low.samples[i].state[k] > high.samples[i].state[k]) {
        ++rep.coupling_violations;
        break;
      }
    }
  }
  rep.holds = ok && rep.coupling_violations == 0;
  return rep;
}

double w_statistic(const NetworkState& x, const Partition& partition, const CsmaParams& params,
                   const TrafficSpec& traffic) {
  double w = 0.0;
  for (const auto& block : partition) {
    double mx = 0.0;
    for (ClassIndex k : block) {
      mx = std::max(mx, x[k] * traffic.mean_flow_size[k] / params.phys_rate[k]);
    }
    w += mx;
  }
  return w;
}

FluidBoundReport lpartite_fluid_bound(const std::vector<Trajectory>& runs,
                                      const Partition& partition, const CsmaParams& params,
                                      const TrafficSpec& traffic, std::size_t num_channels,
                                      double scale, double tolerance, double threshold) {
  if (runs.empty()) throw std::invalid_argument("need at least one trajectory");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  const double slack = static_cast<double>(num_channels) - lpartite_load(traffic.loads(), partition, params);
  if (!(slack > 0.0)) throw std::invalid_argument("load is not inside the L-partite capacity region");
  FluidBoundReport rep{};
  rep.drain_time = 1.0 / slack;
  rep.check_time = rep.drain_time * (1.0 + tolerance);
  for (const auto& run : runs) {
    double at_check = 0.0, excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : run.samples) {
      const double t = s.time / scale;
      const double w = w_statistic(s.state, partition, params, traffic) / scale;
      excess = std::max(excess, w - std::max(0.0, 1.0 - t / rep.drain_time));
      if (t <= rep.check_time) at_check = w;
    }
    rep.residual += at_check / static_cast<double>(runs.size());
    rep.max_excess += excess / static_cast<double>(runs.size());
  }
  rep.holds = rep.residual < threshold;
  return rep;
}

}  // namespace csma
