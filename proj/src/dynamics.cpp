#include "csma/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csma/equilibrium.hpp"
#include "csma/parallel.hpp"
#include "csma/rng.hpp"

namespace csma {

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive");
  }
  if (scaling_n < 1) throw std::invalid_argument("scaling parameter N must be >= 1");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0.0 || sample_times[i] > horizon) {
      throw std::invalid_argument("sample times must lie in [0, horizon]");
    }
    if (i > 0 && !(sample_times[i] > sample_times[i - 1])) {
      throw std::invalid_argument("sample times must be strictly increasing");
    }
  }
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const std::size_t K = samples.empty() ? time_average.size() : samples.front().state.size();
  os << "time";
  for (std::size_t k = 0; k < K; ++k) os << ",x_" << k + 1;
  const bool with_y = !samples.empty() && samples.front().schedule.has_value();
  if (with_y) os << ",y";
  os << '\n';
  for (const auto& s : samples) {
    os << s.time;
    for (int v : s.state.flows) os << ',' << v;
    if (with_y) os << ',' << (s.schedule ? s.schedule->to_string() : std::string());
    os << '\n';
  }
  return os.str();
}

ThroughputCache::ThroughputCache(ThroughputFn fn, std::size_t capacity)
    : fn_(std::move(fn)), capacity_(std::max<std::size_t>(1, capacity)) {}

const std::vector<double>& ThroughputCache::operator()(const NetworkState& x) {
  if (auto it = index_.find(x); it != index_.end()) {
    ++hits_;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }
  ++misses_;
  if (index_.size() >= capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
  order_.emplace_front(x, fn_(x));
  index_.emplace(x, order_.begin());
  return order_.front().second;
}

namespace {

NetworkState initial_of(const SimConfig& cfg, std::size_t K) {
  if (cfg.initial_state.size() == 0) return NetworkState::zeros(K);
  if (cfg.initial_state.size() != K) throw std::invalid_argument("initial state has wrong dimension");
  for (int v : cfg.initial_state.flows) {
    if (v < 0) throw std::invalid_argument("initial state must be nonnegative");
  }
  return cfg.initial_state;
}

void init_trajectory(Trajectory& tr, std::size_t K) {
  tr.events.arrivals.assign(K, 0);
  tr.events.departures.assign(K, 0);
  tr.events.packets.assign(K, 0);
  tr.events.accesses.assign(K, 0);
  tr.time_average.assign(K, 0.0);
  tr.served_work.assign(K, 0.0);
}

/// Records samples as simulated time advances.
class Recorder {
 public:
  Recorder(const SimConfig& cfg, Trajectory& tr) : times_(cfg.sample_times), tr_(tr) {}

  /// The state held on [now, t); record every sample time in that window.
  void advance(double t, const NetworkState& x, const std::optional<Schedule>& y) {
    while (next_ < times_.size() && times_[next_] < t) {
      tr_.samples.push_back({times_[next_], x, y});
      ++next_;
    }
  }
  /// The state just changed at time t.
  void jump(double t, const NetworkState& x, const std::optional<Schedule>& y) {
    if (times_.empty()) tr_.samples.push_back({t, x, y});
  }
  void finish(double end, const NetworkState& x, const std::optional<Schedule>& y, bool aborted) {
    // Samples at exactly the horizon see the final state; after an abort the
    // remaining sample times are left unrecorded.
    if (!aborted) {
      while (next_ < times_.size() && times_[next_] <= end) {
        tr_.samples.push_back({times_[next_], x, y});
        ++next_;
      }
    }
  }

 private:
  const std::vector<double>& times_;
  Trajectory& tr_;
  std::size_t next_ = 0;
};

void finalize_averages(Trajectory& tr) {
  if (tr.end_time > 0.0) {
    for (double& v : tr.time_average) v /= tr.end_time;
  }
}

}  // namespace

Trajectory simulate_flow_level(const ThroughputFn& phi, const std::vector<double>& rate_caps,
                               const TrafficSpec& traffic, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t K = rate_caps.size();
  if (traffic.arrival_rate.size() != K || traffic.mean_flow_size.size() != K) {
    throw std::invalid_argument("traffic dimension does not match the throughput caps");
  }
  NetworkState x = initial_of(cfg, K);
  Trajectory tr;
  init_trajectory(tr, K);
  Recorder rec(cfg, tr);

  std::vector<double> bucket;  // cumulative candidate rates: arrivals then departures
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) bucket.push_back(total += traffic.arrival_rate[k]);
  for (std::size_t k = 0; k < K; ++k) {
    if (!(rate_caps[k] > 0.0)) throw std::invalid_argument("throughput caps must be positive");
    bucket.push_back(total += rate_caps[k] / traffic.mean_flow_size[k]);
  }

  CounterRng clock(cfg.seed, stream_id(StreamKind::clock));
  CounterRng select(cfg.seed, stream_id(StreamKind::select));
  std::vector<CounterRng> depart;
  for (std::size_t k = 0; k < K; ++k) depart.emplace_back(cfg.seed, stream_id(StreamKind::departure, k));

  std::vector<double> rate = phi(x);
  const std::optional<Schedule> none;
  rec.jump(0.0, x, none);
  double t = 0.0;
  auto accumulate = [&](double dt) {
    for (std::size_t k = 0; k < K; ++k) {
      tr.time_average[k] += dt * x[k];
      tr.served_work[k] += dt * rate[k];
    }
  };

  while (total > 0.0) {
    const double t_next = t + clock.exponential(total);
    if (t_next > cfg.horizon) break;
    rec.advance(t_next, x, none);
    accumulate(t_next - t);
    t = t_next;

    const double u = select.uniform() * total;
    const auto c = static_cast<std::size_t>(std::upper_bound(bucket.begin(), bucket.end(), u) - bucket.begin());
    const std::size_t which = std::min(c, bucket.size() - 1);
    if (which < K) {
      ++x[which];
      ++tr.events.arrivals[which];
    } else {
      const std::size_t k = which - K;
      const double accept = depart[k].uniform();
      if (x[k] == 0 || !(accept * rate_caps[k] < rate[k])) continue;
      --x[k];
      ++tr.events.departures[k];
    }
    rate = phi(x);
    rec.jump(t, x, none);
    if (x.total() > cfg.truncation_guard) {
      tr.aborted = true;
      break;
    }
  }
  if (!tr.aborted) {
    accumulate(cfg.horizon - t);
    t = cfg.horizon;
  }
  tr.end_time = t;
  rec.finish(t, x, none, tr.aborted);
  finalize_averages(tr);
  return tr;
}

std::vector<double> throughput_caps(const NetworkSpec& spec, const CsmaParams& params) {
  std::vector<double> caps(spec.num_classes());
  for (std::size_t k = 0; k < caps.size(); ++k) {
    const std::size_t slots = spec.is_downlink(k) ? 1 : spec.channel_count(k);
    caps[k] = params.phys_rate[k] * static_cast<double>(std::max<std::size_t>(slots, 1));
  }
  return caps;
}

Trajectory simulate_separated(const NetworkSpec& spec, const CsmaParams& params,
                              const TrafficSpec& traffic, const SimConfig& cfg) {
  require_policy_applicable(spec, params, cfg.policy);
  ThroughputCache cache(
      [&](const NetworkState& x) { return throughput(spec, x, params, cfg.policy, cfg.limits); },
      cfg.cache_size);
  return simulate_flow_level([&](const NetworkState& x) { return cache(x); },
                             throughput_caps(spec, params), traffic, cfg);
}

Trajectory simulate_joint(const NetworkSpec& spec, const CsmaParams& params,
                          const TrafficSpec& traffic, const SimConfig& cfg) {
  cfg.validate();
  require_policy_applicable(spec, params, cfg.policy);
  const std::size_t K = spec.num_classes(), J = spec.num_channels();
  const double N = cfg.scaling_n;
  for (std::size_t k = 0; k < K; ++k) {
    if (traffic.mean_flow_size[k] * N < 1.0) {
      throw std::invalid_argument("sigma_k * N must be at least 1 (one packet per flow)");
    }
  }
  NetworkState x = initial_of(cfg, K);
  Schedule y = cfg.initial_schedule.value_or(Schedule(K, J));
  if (!is_feasible(spec, y, x)) throw std::invalid_argument("initial schedule infeasible for X(0)");

  Trajectory tr;
  init_trajectory(tr, K);
  Recorder rec(cfg, tr);
  CounterRng clock(cfg.seed, stream_id(StreamKind::clock));
  CounterRng select(cfg.seed, stream_id(StreamKind::select));

  enum class Kind : std::uint8_t { arrival, access, packet, completion };
  struct Move { double rate; Kind kind; std::size_t k, j; };
  std::vector<Move> moves;
  moves.reserve(K + 3 * K * J);

  auto can_access = [&](std::size_t k, std::size_t j) {
    if (y.active(k, j) || !spec.eligible(k, j)) return false;
    if (static_cast<int>(y.per_class(k)) >= x[k]) return false;
    if (spec.conflict_mask(k, j) & y.channel_set(j)) return false;
    if (auto ap = spec.downlink_ap(k)) {
      for (ClassIndex l : spec.access_points()[*ap].downlink) {
        if (y.per_class(l) > 0) return false;
      }
    }
    return true;
  };

  rec.jump(0.0, x, y);
  double t = 0.0;
  auto accumulate = [&](double dt) {
    for (std::size_t k = 0; k < K; ++k) {
      tr.time_average[k] += dt * x[k];
      tr.served_work[k] += dt * params.phys_rate[k] * static_cast<double>(y.per_class(k));
    }
  };

  while (true) {
    moves.clear();
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (traffic.arrival_rate[k] > 0.0) {
        moves.push_back({traffic.arrival_rate[k], Kind::arrival, k, 0});
        total += traffic.arrival_rate[k];
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double sigma = traffic.mean_flow_size[k];
      for (std::size_t j = 0; j < J; ++j) {
        if (y.active(k, j)) {
          const double cont = N * params.phys_rate[k] * (1.0 - 1.0 / (sigma * N));
          if (cont > 0.0) {
            moves.push_back({cont, Kind::packet, k, j});
            total += cont;
          }
          const double done = params.phys_rate[k] / sigma;
          moves.push_back({done, Kind::completion, k, j});
          total += done;
        } else if (can_access(k, j)) {
          const double r = N * activation_rate(spec, x, y, k, j, params, cfg.policy);
          if (r > 0.0) {
            moves.push_back({r, Kind::access, k, j});
            total += r;
          }
        }
      }
    }
    if (total <= 0.0) break;
    const double t_next = t + clock.exponential(total);
    if (t_next > cfg.horizon) break;
    rec.advance(t_next, x, y);
    accumulate(t_next - t);
    t = t_next;

    double u = select.uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < moves.size() && u >= moves[pick].rate) {
      u -= moves[pick].rate;
      ++pick;
    }
    const Move& m = moves[pick];
    switch (m.kind) {
      case Kind::arrival:
        ++x[m.k];
        ++tr.events.arrivals[m.k];
        break;
      case Kind::access:
        y = y.with(m.k, m.j);
        ++tr.events.accesses[m.k];
        break;
      case Kind::packet:
        y = y.without(m.k, m.j);
        ++tr.events.packets[m.k];
        break;
      case Kind::completion:
        y = y.without(m.k, m.j);
        --x[m.k];
        ++tr.events.departures[m.k];
        break;
    }
    rec.jump(t, x, y);
    if (x.total() > cfg.truncation_guard) {
      tr.aborted = true;
      break;
    }
  }
  if (!tr.aborted) {
    accumulate(cfg.horizon - t);
    t = cfg.horizon;
  }
  tr.end_time = t;
  rec.finish(t, x, y, tr.aborted);
  finalize_averages(tr);
  return tr;
}

TransientDistribution separated_transient_distribution(const NetworkSpec& spec,
                                                       const CsmaParams& params,
                                                       const TrafficSpec& traffic, Policy policy,
                                                       const NetworkState& initial, double t,
                                                       double tail_tolerance) {
  require_policy_applicable(spec, params, policy);
  const std::size_t K = spec.num_classes();
  if (initial.size() != K) throw std::invalid_argument("initial state has wrong dimension");
  TransientDistribution out;
  if (t <= 0.0) {
    out.probability[initial] = 1.0;
    return out;
  }

  // Arrival budget m with P(Poisson(lambda t) > m) below the tolerance.
  const double lt = std::accumulate(traffic.arrival_rate.begin(), traffic.arrival_rate.end(), 0.0) * t;
  long budget = 0;
  {
    double term = std::exp(-lt), cdf = term;
    while (1.0 - cdf > tail_tolerance && budget < 100000) {
      ++budget;
      term *= lt / static_cast<double>(budget);
      cdf += term;
    }
  }

  auto used = [&](const NetworkState& x) {
    long a = 0;
    for (std::size_t k = 0; k < K; ++k) a += std::max(0, x[k] - initial[k]);
    return a;
  };

  std::vector<NetworkState> states{initial};
  std::map<NetworkState, std::size_t> index{{initial, 0}};
  struct Edge { std::size_t from, to; double rate; };
  std::vector<Edge> edges;
  std::vector<double> outflow;
  std::vector<double> sink_rate;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const NetworkState x = states[s];
    const auto phi = throughput(spec, x, params, policy);
    double out_rate = 0.0, sink = 0.0;
    auto link = [&](NetworkState z, double r) {
      if (r <= 0.0) return;
      out_rate += r;
      auto [it, fresh] = index.emplace(z, states.size());
      if (fresh) states.push_back(std::move(z));
      edges.push_back({s, it->second, r});
    };
    for (std::size_t k = 0; k < K; ++k) {
      NetworkState up = x;
      ++up[k];
      const double lam = traffic.arrival_rate[k];
      if (used(up) <= budget) {
        link(up, lam);
      } else {
        out_rate += lam;
        sink += lam;
      }
      if (x[k] > 0) {
        NetworkState down = x;
        --down[k];
        link(down, phi[k] / traffic.mean_flow_size[k]);
      }
    }
    outflow.push_back(out_rate);
    sink_rate.push_back(sink);
  }

  const std::size_t n = states.size();
  const double lambda_u = std::max(1e-300, *std::max_element(outflow.begin(), outflow.end())) * 1.0001;
  std::vector<double> p(n, 0.0), next(n), acc(n, 0.0);
  p[0] = 1.0;
  double sink_mass = 0.0, sink_acc = 0.0;
  const double lu = lambda_u * t;
  double log_w = -lu, cum = 0.0;
  for (long step = 0;; ++step) {
    const double w = std::exp(log_w);
    for (std::size_t s = 0; s < n; ++s) acc[s] += w * p[s];
    sink_acc += w * sink_mass;
    cum += w;
    if (1.0 - cum < tail_tolerance && static_cast<double>(step) > lu) break;
    if (step > 10'000'000) throw std::runtime_error("transient solve did not converge");
    for (std::size_t s = 0; s < n; ++s) next[s] = p[s] * (1.0 - outflow[s] / lambda_u);
    for (const auto& e : edges) next[e.to] += p[e.from] * e.rate / lambda_u;
    for (std::size_t s = 0; s < n; ++s) sink_mass += p[s] * sink_rate[s] / lambda_u;
    p.swap(next);
    log_w += std::log(lu) - std::log(static_cast<double>(step + 1));
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (acc[s] > 0.0) out.probability[states[s]] = acc[s];
  }
  out.truncated_mass = sink_acc + std::max(0.0, 1.0 - cum);
  return out;
}

namespace {

/// TV distance between an empirical sample (multiset of states) and a
/// reference law, with states beyond the window pooled.
double tv_distance(const std::vector<const NetworkState*>& sample,
                   const std::map<NetworkState, double>& reference, long window) {
  std::map<NetworkState, double> emp;
  double emp_out = 0.0;
  const double inv = 1.0 / static_cast<double>(sample.size());
  for (const NetworkState* x : sample) {
    if (x->total() <= window) {
      emp[*x] += inv;
    } else {
      emp_out += inv;
    }
  }
  double ref_out = 0.0, sum = 0.0;
  for (const auto& [x, p] : reference) {
    if (x.total() > window) {
      ref_out += p;
      continue;
    }
    auto it = emp.find(x);
    sum += std::abs((it == emp.end() ? 0.0 : it->second) - p);
  }
  for (const auto& [x, q] : emp) {
    if (!reference.count(x)) sum += q;
  }
  ref_out += std::max(0.0, 1.0 - std::accumulate(reference.begin(), reference.end(), 0.0,
                                                 [](double a, const auto& e) { return a + e.second; }));
  sum += std::abs(emp_out - ref_out);
  return 0.5 * sum;
}

}  // namespace

std::vector<DistanceRow> timescale_convergence(const NetworkSpec& spec, const CsmaParams& params,
                                               const TrafficSpec& traffic,
                                               const TimescaleConfig& cfg) {
  if (cfg.replications == 0) throw std::invalid_argument("need at least one replication");
  const auto reference = separated_transient_distribution(spec, params, traffic, cfg.policy,
                                                          cfg.initial_state, cfg.t_probe);
  std::vector<DistanceRow> rows;
  for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
    const int N = cfg.n_values[ni];
    std::vector<NetworkState> finals(cfg.replications);
    if (cfg.t_probe <= 0.0) {
      std::fill(finals.begin(), finals.end(), cfg.initial_state);
    } else {
      parallel_for(cfg.replications, [&](std::size_t r) {
        SimConfig sc;
        sc.policy = cfg.policy;
        sc.scaling_n = N;
        sc.horizon = cfg.t_probe;
        sc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(N), r);
        sc.sample_times = {cfg.t_probe};
        sc.initial_state = cfg.initial_state;
        finals[r] = simulate_joint(spec, params, traffic, sc).samples.back().state;
      });
    }
    std::vector<const NetworkState*> all;
    for (const auto& s : finals) all.push_back(&s);
    DistanceRow row{N, tv_distance(all, reference.probability, cfg.window), 0.0, 0.0};

    std::vector<double> boot(cfg.bootstrap);
    CounterRng rng(derive_seed(cfg.seed, 0xb007, static_cast<std::uint64_t>(N)),
                   stream_id(StreamKind::bootstrap));
    std::vector<const NetworkState*> resample(finals.size());
    for (auto& b : boot) {
      for (auto& ptr : resample) ptr = &finals[rng.below(finals.size())];
      b = tv_distance(resample, reference.probability, cfg.window);
    }
    std::sort(boot.begin(), boot.end());
    if (!boot.empty()) {
      row.ci_lo = boot[static_cast<std::size_t>(0.025 * static_cast<double>(boot.size() - 1))];
      row.ci_hi = boot[static_cast<std::size_t>(0.975 * static_cast<double>(boot.size() - 1))];
    }
    rows.push_back(row);
  }
  return rows;
}

std::string distance_csv(const std::vector<DistanceRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "N,distance,ci_lo,ci_hi\n";
  for (const auto& r : rows) os << r.scaling_n << ',' << r.distance << ',' << r.ci_lo << ',' << r.ci_hi << '\n';
  return os.str();
}

}  // namespace csma
