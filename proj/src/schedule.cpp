#include "csma/schedule.hpp"

#include "csma/equilibrium.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace csma {

Schedule::Schedule(std::size_t num_classes, std::size_t num_channels, std::uint64_t mask)
    : K_(num_classes), J_(num_channels), mask_(mask) {
  if (K_ * J_ > NetworkSpec::kMaxCells) throw SpecError("schedule larger than 64 cells");
  if (K_ * J_ < 64 && (mask_ >> (K_ * J_)) != 0) throw SpecError("schedule mask out of range");
}

std::size_t Schedule::per_class(ClassIndex k) const noexcept {
  const std::uint64_t ones = J_ >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << J_) - 1;
  const std::uint64_t row = ones << (k * J_);
  return static_cast<std::size_t>(std::popcount(mask_ & row));
}

std::vector<std::size_t> Schedule::per_class() const {
  std::vector<std::size_t> y(K_);
  for (std::size_t k = 0; k < K_; ++k) y[k] = per_class(k);
  return y;
}

std::uint64_t Schedule::channel_set(ChannelIndex j) const noexcept {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < K_; ++k) {
    if (active(k, j)) s |= std::uint64_t{1} << k;
  }
  return s;
}

std::size_t Schedule::total() const noexcept { return static_cast<std::size_t>(std::popcount(mask_)); }

Schedule Schedule::with(ClassIndex k, ChannelIndex j) const noexcept {
  return Schedule(K_, J_, mask_ | (std::uint64_t{1} << bit(k, j)));
}

Schedule Schedule::without(ClassIndex k, ChannelIndex j) const noexcept {
  return Schedule(K_, J_, mask_ & ~(std::uint64_t{1} << bit(k, j)));
}

std::string Schedule::to_string() const {
  std::string s;
  s.reserve(K_ * (J_ + 1));
  for (std::size_t k = 0; k < K_; ++k) {
    if (k) s.push_back('/');
    for (std::size_t j = 0; j < J_; ++j) s.push_back(active(k, j) ? '1' : '0');
  }
  return s;
}

Schedule Schedule::parse(std::string_view text) {
  std::vector<std::string_view> rows;
  std::size_t start = 0;
  while (true) {
    const auto slash = text.find('/', start);
    rows.push_back(text.substr(start, slash == std::string_view::npos ? slash : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  const std::size_t K = rows.size(), J = rows.front().size();
  if (J == 0) throw SpecError("empty schedule row");
  std::uint64_t mask = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (rows[k].size() != J) throw SpecError("ragged schedule matrix");
    for (std::size_t j = 0; j < J; ++j) {
      const char c = rows[k][j];
      if (c != '0' && c != '1') throw SpecError("schedule cells must be 0 or 1");
      if (c == '1') mask |= std::uint64_t{1} << (k * J + j);
    }
  }
  return Schedule(K, J, mask);
}

std::uint64_t Schedule::lex_key() const noexcept {
  std::uint64_t r = mask_;
  // Bit-reverse so that flattened index 0 becomes the most significant bit.
  r = ((r >> 1) & 0x5555555555555555ULL) | ((r & 0x5555555555555555ULL) << 1);
  r = ((r >> 2) & 0x3333333333333333ULL) | ((r & 0x3333333333333333ULL) << 2);
  r = ((r >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((r & 0x0F0F0F0F0F0F0F0FULL) << 4);
  r = ((r >> 8) & 0x00FF00FF00FF00FFULL) | ((r & 0x00FF00FF00FF00FFULL) << 8);
  r = ((r >> 16) & 0x0000FFFF0000FFFFULL) | ((r & 0x0000FFFF0000FFFFULL) << 16);
  return (r >> 32) | (r << 32);
}

long NetworkState::total() const noexcept {
  long s = 0;
  for (int v : flows) s += v;
  return s;
}

std::string NetworkState::to_string() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < flows.size(); ++k) os << (k ? "," : "") << flows[k];
  return os.str();
}

std::size_t NetworkStateHash::operator()(const NetworkState& x) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int v : x.flows) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

namespace {

void require_state_size(const NetworkSpec& spec, const NetworkState& x) {
  if (x.size() != spec.num_classes()) throw SpecError("state dimension does not match K");
  for (int v : x.flows) {
    if (v < 0) throw SpecError("flow counts must be nonnegative");
  }
}

struct Enumerator {
  const NetworkSpec& spec;
  std::size_t K, J, max_out;
  std::vector<std::size_t> limit;          // per-class cap on y_k
  std::vector<std::vector<std::uint64_t>> sets;  // independent sets per channel
  std::vector<std::size_t> used;
  std::vector<int> ap_used;
  std::vector<Schedule> out;

  void independent_sets(std::size_t j, std::uint64_t allowed) {
    auto& dst = sets[j];
    std::vector<ClassIndex> cand;
    for (std::size_t k = 0; k < K; ++k) {
      if ((allowed >> k) & 1U) cand.push_back(k);
    }
    // Depth-first over candidates; `banned` accumulates neighbours.
    struct Frame { std::size_t pos; std::uint64_t set, banned; };
    std::vector<Frame> stack{{0, 0, 0}};
    while (!stack.empty()) {
      Frame f = stack.back();
      stack.pop_back();
      if (f.pos == cand.size()) {
        dst.push_back(f.set);
        if (dst.size() > max_out) {
          throw CapacityGuardError("channel " + std::to_string(j + 1) +
                                   " has more independent sets than the enumeration bound");
        }
        continue;
      }
      const ClassIndex k = cand[f.pos];
      stack.push_back({f.pos + 1, f.set, f.banned});
      if (!((f.banned >> k) & 1U)) {
        stack.push_back({f.pos + 1, f.set | (std::uint64_t{1} << k),
                         f.banned | spec.conflict_mask(k, j)});
      }
    }
  }

  void recurse(std::size_t j, std::uint64_t mask) {
    if (j == J) {
      out.emplace_back(K, J, mask);
      if (out.size() > max_out) {
        throw CapacityGuardError("feasible schedule count exceeds the enumeration bound of " +
                                 std::to_string(max_out));
      }
      return;
    }
    for (std::uint64_t s : sets[j]) {
      bool ok = true;
      for (std::uint64_t r = s; r && ok; r &= r - 1) {
        const auto k = static_cast<std::size_t>(std::countr_zero(r));
        if (used[k] >= limit[k]) ok = false;
        if (auto ap = spec.downlink_ap(k); ap && ap_used[*ap] >= 1) ok = false;
        // Two downlink classes of one access point in the same set.
        if (ok && spec.is_downlink(k)) {
          for (std::uint64_t q = r & (r - 1); q; q &= q - 1) {
            const auto l = static_cast<std::size_t>(std::countr_zero(q));
            if (spec.downlink_ap(l) == spec.downlink_ap(k)) ok = false;
          }
        }
      }
      if (!ok) continue;
      std::uint64_t add = 0;
      for (std::uint64_t r = s; r; r &= r - 1) {
        const auto k = static_cast<std::size_t>(std::countr_zero(r));
        ++used[k];
        if (auto ap = spec.downlink_ap(k)) ++ap_used[*ap];
        add |= std::uint64_t{1} << (k * J + j);
      }
      recurse(j + 1, mask | add);
      for (std::uint64_t r = s; r; r &= r - 1) {
        const auto k = static_cast<std::size_t>(std::countr_zero(r));
        --used[k];
        if (auto ap = spec.downlink_ap(k)) --ap_used[*ap];
      }
    }
  }
};

}  // namespace

std::vector<Schedule> enumerate_feasible(const NetworkSpec& spec,
                                         const std::optional<NetworkState>& state,
                                         const EnumerationLimits& limits) {
  const std::size_t K = spec.num_classes(), J = spec.num_channels();
  Enumerator e{spec, K, J, limits.max_schedules, {}, {}, {}, {}, {}};
  e.limit.assign(K, J);
  if (state) {
    require_state_size(spec, *state);
    for (std::size_t k = 0; k < K; ++k) {
      e.limit[k] = std::min<std::size_t>(J, static_cast<std::size_t>((*state)[k]));
    }
  }
  e.sets.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    std::uint64_t allowed = spec.eligible_mask(j);
    for (std::size_t k = 0; k < K; ++k) {
      if (e.limit[k] == 0) allowed &= ~(std::uint64_t{1} << k);
    }
    e.independent_sets(j, allowed);
  }
  e.used.assign(K, 0);
  e.ap_used.assign(spec.access_points().size(), 0);
  e.recurse(0, 0);
  std::sort(e.out.begin(), e.out.end());
  return std::move(e.out);
}

bool is_feasible(const NetworkSpec& spec, const Schedule& y,
                 const std::optional<NetworkState>& state) {
  const std::size_t K = spec.num_classes(), J = spec.num_channels();
  if (y.num_classes() != K || y.num_channels() != J) return false;
  for (std::size_t j = 0; j < J; ++j) {
    const std::uint64_t on = y.channel_set(j);
    if (on & ~spec.eligible_mask(j)) return false;
    for (std::uint64_t r = on; r; r &= r - 1) {
      const auto k = static_cast<std::size_t>(std::countr_zero(r));
      if (spec.conflict_mask(k, j) & on) return false;
    }
  }
  std::vector<int> downlink(spec.access_points().size(), 0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto yk = static_cast<int>(y.per_class(k));
    if (state && yk > (*state)[k]) return false;
    if (auto ap = spec.downlink_ap(k)) {
      downlink[*ap] += yk;
      if (downlink[*ap] > 1) return false;
    }
  }
  return true;
}

double log_weight_u(const NetworkState& x, const Schedule& y, const CsmaParams& params) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::size_t yk = y.per_class(k);
    if (x[k] > 0 && yk > 0) {
      s += static_cast<double>(yk) * std::log(static_cast<double>(x[k]) * params.alpha(k));
    }
  }
  return s;
}

MaxWeight max_weight(const NetworkSpec& spec, const NetworkState& x, const CsmaParams& params,
                     WeightDomain over, const EnumerationLimits& limits) {
  require_state_size(spec, x);
  const auto schedules = over == WeightDomain::restricted ? enumerate_feasible(spec, x, limits)
                                                          : enumerate_feasible(spec, std::nullopt, limits);
  MaxWeight best{log_weight_u(x, schedules.front(), params), schedules.front()};
  for (std::size_t i = 1; i < schedules.size(); ++i) {
    const double w = log_weight_u(x, schedules[i], params);
    const double tol = 1e-12 * std::max(1.0, std::abs(best.log_weight));
    // Ascending iteration: ">= within tolerance" keeps the greatest tied matrix.
    if (w >= best.log_weight - tol) {
      if (w > best.log_weight + tol) best.log_weight = w;
      best.argmax = schedules[i];
    }
  }
  return best;
}

double lemma2_log_bound(const NetworkSpec& spec, const CsmaParams& params) {
  const std::size_t J = spec.num_channels();
  if (J < 2) return 0.0;
  const double Jd = static_cast<double>(J);
  double bound = 0.0;
  for (std::size_t k = 0; k < spec.num_classes(); ++k) {
    const double a = params.alpha(k);
    const double lo = std::min(0.0, Jd * std::log(a));
    const double hi = std::max(0.0, Jd * std::log((Jd - 1.0) * a));
    bound += hi - lo;
  }
  return bound;
}

Lemma2Check lemma2_check(const NetworkSpec& spec, const NetworkState& x, const CsmaParams& params,
                         const EnumerationLimits& limits) {
  Lemma2Check c{};
  c.log_u = max_weight(spec, x, params, WeightDomain::restricted, limits).log_weight;
  c.log_v = max_weight(spec, x, params, WeightDomain::unrestricted, limits).log_weight;
  c.log_bound = lemma2_log_bound(spec, params);
  c.holds = c.log_v - c.log_u <= c.log_bound + 1e-12 * std::max(1.0, std::abs(c.log_v));
  return c;
}

std::vector<ScheduleMass> alpha_limit_distribution(const NetworkSpec& spec, const NetworkState& x,
                                                   const CsmaParams& params, Policy policy,
                                                   const EnumerationLimits& limits) {
  require_state_size(spec, x);
  require_policy_applicable(spec, params, policy);
  const double alpha = params.alpha(0);
  for (std::size_t k = 1; k < spec.num_classes(); ++k) {
    if (std::abs(params.alpha(k) - alpha) > 1e-12 * alpha) {
      throw std::invalid_argument("the alpha -> infinity limit is only defined for equal alpha");
    }
  }
  const auto schedules = enumerate_feasible(spec, x, limits);
  std::size_t top = 0;
  for (const auto& y : schedules) top = std::max(top, y.total());

  // Every schedule with `top` activations carries alpha^top; dividing it out
  // leaves the alpha-free factors.
  std::vector<ScheduleMass> out;
  std::vector<double> logw;
  for (const auto& y : schedules) {
    if (y.total() != top) continue;
    logw.push_back(log_measure(spec, x, y, params, policy) -
                   static_cast<double>(top) * std::log(alpha));
    out.push_back({y, 0.0});
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double w : logw) z += std::exp(w - mx);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].probability = std::exp(logw[i] - mx) / z;
  return out;
}

std::vector<double> class_activity(const std::vector<ScheduleMass>& dist, std::size_t K) {
  std::vector<double> a(K, 0.0);
  for (const auto& [y, p] : dist) {
    for (std::size_t k = 0; k < K; ++k) a[k] += p * static_cast<double>(y.per_class(k));
  }
  return a;
}

}  // namespace csma
