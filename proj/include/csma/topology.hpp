#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csma {

/// Class indices are 0-based everywhere inside the library.
using ClassIndex = std::size_t;
using ChannelIndex = std::size_t;
using ClassPair = std::pair<ClassIndex, ClassIndex>;

/// Conflict graph of one channel: the classes allowed on it and the pairs
/// that cannot be simultaneously active on it.
struct ChannelGraph {
  std::vector<ClassIndex> eligible;
  std::vector<ClassPair> edges;

  bool operator==(const ChannelGraph&) const = default;
};

struct AccessPoint {
  std::vector<ClassIndex> uplink;
  std::vector<ClassIndex> downlink;

  bool operator==(const AccessPoint&) const = default;
};

enum class Mode { ad_hoc, infrastructure };

/// Thrown when an index or dimension is out of range at construction time.
/// Structural invariants (conflicts, access-point rules) are not exceptions;
/// they are reported by validate_spec().
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Immutable network description: K classes, J channels, one conflict graph
/// per channel and, in infrastructure mode, the access-point structure.
///
/// Edges are canonicalized (smaller index first), sorted and deduplicated;
/// eligibility lists and access-point class lists are sorted. Two specs that
/// describe the same network therefore compare equal.
class NetworkSpec {
 public:
  /// Largest K*J supported; schedules are stored as 64-bit masks.
  static constexpr std::size_t kMaxCells = 64;

  NetworkSpec(std::size_t num_classes, std::size_t num_channels,
              std::vector<ChannelGraph> channel_graphs, Mode mode = Mode::ad_hoc,
              std::vector<AccessPoint> access_points = {});

  /// Same conflict graph on every channel.
  static NetworkSpec replicated(std::size_t num_classes, std::size_t num_channels,
                                const ChannelGraph& graph, Mode mode = Mode::ad_hoc,
                                std::vector<AccessPoint> access_points = {});

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t num_channels() const noexcept { return num_channels_; }
  Mode mode() const noexcept { return mode_; }
  const std::vector<ChannelGraph>& channel_graphs() const noexcept { return graphs_; }
  const ChannelGraph& graph(ChannelIndex j) const { return graphs_.at(j); }
  const std::vector<AccessPoint>& access_points() const noexcept { return access_points_; }

  bool eligible(ClassIndex k, ChannelIndex j) const noexcept {
    return (eligible_mask_[j] >> k) & 1U;
  }
  bool conflicts(ClassIndex k, ClassIndex l, ChannelIndex j) const noexcept {
    return (conflict_mask_[j][k] >> l) & 1U;
  }
  /// Bit l set iff (k, l) is an edge of channel j.
  std::uint64_t conflict_mask(ClassIndex k, ChannelIndex j) const noexcept {
    return conflict_mask_[j][k];
  }
  std::uint64_t eligible_mask(ChannelIndex j) const noexcept { return eligible_mask_[j]; }

  /// Number of channels class k may use.
  std::size_t channel_count(ClassIndex k) const noexcept;

  /// Access point serving k as a downlink class, if any.
  std::optional<std::size_t> downlink_ap(ClassIndex k) const noexcept { return downlink_ap_[k]; }
  bool is_downlink(ClassIndex k) const noexcept { return downlink_ap_[k].has_value(); }

  bool all_graphs_identical() const;

  bool operator==(const NetworkSpec& other) const;

 private:
  std::size_t num_classes_;
  std::size_t num_channels_;
  Mode mode_;
  std::vector<ChannelGraph> graphs_;
  std::vector<AccessPoint> access_points_;
  std::vector<std::uint64_t> eligible_mask_;
  std::vector<std::vector<std::uint64_t>> conflict_mask_;
  std::vector<std::optional<std::size_t>> downlink_ap_;
};

/// Per-class CSMA parameters.
struct CsmaParams {
  std::vector<double> phys_rate;                 // bit/s
  std::vector<double> attempt_rate;              // 1/s
  std::vector<std::vector<double>> probe_prob;   // K x J

  double alpha(ClassIndex k) const { return attempt_rate.at(k) / phys_rate.at(k); }

  /// Uniform probing over each class's eligible channels.
  static CsmaParams uniform(const NetworkSpec& spec, std::vector<double> phys_rate,
                            std::vector<double> attempt_rate);
  /// All classes share phys_rate and alpha = attempt_rate / phys_rate.
  static CsmaParams homogeneous(const NetworkSpec& spec, double phys_rate, double alpha);

  /// Rescales attempt rates so that every class has the given alpha.
  CsmaParams with_alpha(double alpha) const;

  bool operator==(const CsmaParams&) const = default;
};

struct TrafficSpec {
  std::vector<double> arrival_rate;     // flows/s
  std::vector<double> mean_flow_size;   // bits

  double load(ClassIndex k) const { return arrival_rate.at(k) * mean_flow_size.at(k); }
  std::vector<double> loads() const;

  /// Traffic with mean flow size 1 and the given loads.
  static TrafficSpec from_loads(const std::vector<double>& rho, double mean_flow_size = 1.0);

  bool operator==(const TrafficSpec&) const = default;
};

/// One violated invariant. Locators use 1-based class, channel and access
/// point numbers so messages match scenario files.
struct Violation {
  std::string message;
};

std::vector<Violation> validate_spec(const NetworkSpec& spec);
std::vector<Violation> validate_params(const NetworkSpec& spec, const CsmaParams& params);
std::vector<Violation> validate_traffic(const NetworkSpec& spec, const TrafficSpec& traffic);

/// Partition of the classes into blocks with no conflicts inside a block and
/// all conflicts across blocks. Blocks are ordered by their smallest class.
using Partition = std::vector<std::vector<ClassIndex>>;

/// Requires identical graphs on all channels, each covering every class;
/// throws SpecError otherwise. Returns nothing when the conflict graph is not
/// complete multipartite.
std::optional<Partition> detect_l_partite(const NetworkSpec& spec);

}  // namespace csma
