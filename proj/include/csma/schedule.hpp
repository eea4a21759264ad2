#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csma/policy.hpp"
#include "csma/topology.hpp"

namespace csma {

/// Binary K x J activation matrix. Cell (k, j) lives at flattened index
/// k*J + j; schedules order lexicographically on the flattened matrix.
class Schedule {
 public:
  Schedule(std::size_t num_classes, std::size_t num_channels, std::uint64_t mask = 0);

  std::size_t num_classes() const noexcept { return K_; }
  std::size_t num_channels() const noexcept { return J_; }
  std::uint64_t mask() const noexcept { return mask_; }

  bool active(ClassIndex k, ChannelIndex j) const noexcept { return (mask_ >> bit(k, j)) & 1U; }
  /// y_k: number of channels on which class k is active.
  std::size_t per_class(ClassIndex k) const noexcept;
  std::vector<std::size_t> per_class() const;
  /// Bit set of the classes active on channel j.
  std::uint64_t channel_set(ChannelIndex j) const noexcept;
  std::size_t total() const noexcept;
  bool empty() const noexcept { return mask_ == 0; }

  Schedule with(ClassIndex k, ChannelIndex j) const noexcept;
  Schedule without(ClassIndex k, ChannelIndex j) const noexcept;

  /// Rows joined by '/', e.g. "10/01/00" for K=3, J=2.
  std::string to_string() const;
  static Schedule parse(std::string_view text);

  /// Key whose numeric order equals lexicographic order of the matrix.
  std::uint64_t lex_key() const noexcept;

  bool operator==(const Schedule& o) const noexcept = default;
  std::strong_ordering operator<=>(const Schedule& o) const noexcept {
    return lex_key() <=> o.lex_key();
  }

 private:
  std::size_t bit(ClassIndex k, ChannelIndex j) const noexcept { return k * J_ + j; }

  std::size_t K_;
  std::size_t J_;
  std::uint64_t mask_;
};

/// x: number of flows (links) of each class.
struct NetworkState {
  std::vector<int> flows;

  NetworkState() = default;
  explicit NetworkState(std::vector<int> f) : flows(std::move(f)) {}
  static NetworkState zeros(std::size_t K) { return NetworkState(std::vector<int>(K, 0)); }

  std::size_t size() const noexcept { return flows.size(); }
  int operator[](std::size_t k) const { return flows[k]; }
  int& operator[](std::size_t k) { return flows[k]; }
  long total() const noexcept;
  std::string to_string() const;

  bool operator==(const NetworkState&) const = default;
  auto operator<=>(const NetworkState&) const = default;
};

struct NetworkStateHash {
  std::size_t operator()(const NetworkState& x) const noexcept;
};

/// The instance is too large for exact enumeration.
class CapacityGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnumerationLimits {
  std::size_t max_schedules = 10'000'000;
};

/// Feasible schedules in ascending lexicographic order. With a state this is
/// Y(x) (per-class counts capped by x_k); without, it is the state-free set
/// Y. Infrastructure specs also enforce one downlink transmission per access
/// point. The empty schedule is always first.
std::vector<Schedule> enumerate_feasible(const NetworkSpec& spec,
                                         const std::optional<NetworkState>& state = std::nullopt,
                                         const EnumerationLimits& limits = {});

/// Direct membership test for Y(x) (or Y when no state is given).
bool is_feasible(const NetworkSpec& spec, const Schedule& y,
                 const std::optional<NetworkState>& state = std::nullopt);

/// log u(x, y) = sum over x_k > 0 of y_k log(x_k alpha_k).
double log_weight_u(const NetworkState& x, const Schedule& y, const CsmaParams& params);

enum class WeightDomain { restricted, unrestricted };

struct MaxWeight {
  double log_weight;
  Schedule argmax;
};

/// u(x) over Y(x) (restricted) or v(x) over Y (unrestricted). Among tied
/// schedules the lexicographically greatest matrix wins, which puts the
/// activation on the lowest channel index.
MaxWeight max_weight(const NetworkSpec& spec, const NetworkState& x, const CsmaParams& params,
                     WeightDomain over, const EnumerationLimits& limits = {});

/// log(M/m) bounding log v(x) - log u(x) for every state: only classes with
/// 0 < x_k < J make u and v differ, and each contributes a factor
/// (x_k alpha_k)^{y_k} with 1 <= x_k <= J-1, 0 <= y_k <= J.
double lemma2_log_bound(const NetworkSpec& spec, const CsmaParams& params);

struct Lemma2Check {
  double log_u;
  double log_v;
  double log_bound;
  bool holds;
};

Lemma2Check lemma2_check(const NetworkSpec& spec, const NetworkState& x, const CsmaParams& params,
                         const EnumerationLimits& limits = {});

/// Probability attached to a schedule.
struct ScheduleMass {
  Schedule schedule;
  double probability;
};

/// Limit of the stationary schedule distribution of `policy` as every
/// alpha_k -> infinity at a common value. The support is the set of schedules
/// in Y(x) with the most activations; masses are proportional to the factors
/// of the product-form measure that do not involve alpha. Requires equal
/// alpha across classes (throws std::invalid_argument otherwise).
std::vector<ScheduleMass> alpha_limit_distribution(const NetworkSpec& spec, const NetworkState& x,
                                                   const CsmaParams& params, Policy policy,
                                                   const EnumerationLimits& limits = {});

/// Per-class activity sum_y y_k pi(y).
std::vector<double> class_activity(const std::vector<ScheduleMass>& dist, std::size_t K);

}  // namespace csma
