#include "csma/topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace csma {

namespace {

void sort_unique(std::vector<ClassIndex>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::string cls(ClassIndex k) { return "class " + std::to_string(k + 1); }

}  // namespace

NetworkSpec::NetworkSpec(std::size_t num_classes, std::size_t num_channels,
                         std::vector<ChannelGraph> channel_graphs, Mode mode,
                         std::vector<AccessPoint> access_points)
    : num_classes_(num_classes),
      num_channels_(num_channels),
      mode_(mode),
      graphs_(std::move(channel_graphs)),
      access_points_(std::move(access_points)) {
  if (num_classes_ == 0 || num_channels_ == 0) {
    throw SpecError("network needs at least one class and one channel");
  }
  if (num_classes_ * num_channels_ > kMaxCells) {
    throw SpecError("K*J = " + std::to_string(num_classes_ * num_channels_) +
                    " exceeds the supported maximum of 64 schedule cells");
  }
  if (graphs_.size() != num_channels_) {
    throw SpecError("expected " + std::to_string(num_channels_) + " channel graphs, got " +
                    std::to_string(graphs_.size()));
  }
  auto check = [&](ClassIndex k) {
    if (k >= num_classes_) throw SpecError(cls(k) + " out of range");
  };

  eligible_mask_.assign(num_channels_, 0);
  conflict_mask_.assign(num_channels_, std::vector<std::uint64_t>(num_classes_, 0));
  for (std::size_t j = 0; j < num_channels_; ++j) {
    auto& g = graphs_[j];
    sort_unique(g.eligible);
    for (auto& e : g.edges) {
      check(e.first);
      check(e.second);
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    for (ClassIndex k : g.eligible) {
      check(k);
      eligible_mask_[j] |= std::uint64_t{1} << k;
    }
    for (const auto& [a, b] : g.edges) {
      if (a == b) continue;  // reported by validate_spec
      conflict_mask_[j][a] |= std::uint64_t{1} << b;
      conflict_mask_[j][b] |= std::uint64_t{1} << a;
    }
  }

  downlink_ap_.assign(num_classes_, std::nullopt);
  for (std::size_t i = 0; i < access_points_.size(); ++i) {
    auto& ap = access_points_[i];
    sort_unique(ap.uplink);
    sort_unique(ap.downlink);
    for (ClassIndex k : ap.uplink) check(k);
    for (ClassIndex k : ap.downlink) {
      check(k);
      if (!downlink_ap_[k]) downlink_ap_[k] = i;
    }
  }
}

NetworkSpec NetworkSpec::replicated(std::size_t num_classes, std::size_t num_channels,
                                    const ChannelGraph& graph, Mode mode,
                                    std::vector<AccessPoint> access_points) {
  return NetworkSpec(num_classes, num_channels, std::vector<ChannelGraph>(num_channels, graph),
                     mode, std::move(access_points));
}

std::size_t NetworkSpec::channel_count(ClassIndex k) const noexcept {
  std::size_t n = 0;
  for (std::size_t j = 0; j < num_channels_; ++j) n += eligible(k, j) ? 1 : 0;
  return n;
}

bool NetworkSpec::all_graphs_identical() const {
  return std::all_of(graphs_.begin(), graphs_.end(),
                     [&](const ChannelGraph& g) { return g == graphs_.front(); });
}

bool NetworkSpec::operator==(const NetworkSpec& other) const {
  return num_classes_ == other.num_classes_ && num_channels_ == other.num_channels_ &&
         mode_ == other.mode_ && graphs_ == other.graphs_ &&
         access_points_ == other.access_points_;
}

CsmaParams CsmaParams::uniform(const NetworkSpec& spec, std::vector<double> phys_rate,
                               std::vector<double> attempt_rate) {
  CsmaParams p{std::move(phys_rate), std::move(attempt_rate), {}};
  const std::size_t K = spec.num_classes(), J = spec.num_channels();
  p.probe_prob.assign(K, std::vector<double>(J, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t n = spec.channel_count(k);
    for (std::size_t j = 0; j < J; ++j) {
      if (spec.eligible(k, j)) p.probe_prob[k][j] = 1.0 / static_cast<double>(n);
    }
  }
  return p;
}

CsmaParams CsmaParams::homogeneous(const NetworkSpec& spec, double phys_rate, double alpha) {
  const std::size_t K = spec.num_classes();
  return uniform(spec, std::vector<double>(K, phys_rate), std::vector<double>(K, alpha * phys_rate));
}

CsmaParams CsmaParams::with_alpha(double alpha) const {
  CsmaParams p = *this;
  for (std::size_t k = 0; k < p.phys_rate.size(); ++k) p.attempt_rate[k] = alpha * p.phys_rate[k];
  return p;
}

std::vector<double> TrafficSpec::loads() const {
  std::vector<double> rho(arrival_rate.size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = load(k);
  return rho;
}

TrafficSpec TrafficSpec::from_loads(const std::vector<double>& rho, double mean_flow_size) {
  TrafficSpec t;
  t.mean_flow_size.assign(rho.size(), mean_flow_size);
  for (double r : rho) t.arrival_rate.push_back(r / mean_flow_size);
  return t;
}

std::vector<Violation> validate_spec(const NetworkSpec& spec) {
  std::vector<Violation> out;
  const std::size_t J = spec.num_channels();

  for (std::size_t j = 0; j < J; ++j) {
    for (const auto& [a, b] : spec.graph(j).edges) {
      std::ostringstream loc;
      loc << "channel " << j + 1 << ", edge (" << a + 1 << "," << b + 1 << ")";
      if (a == b) {
        out.push_back({loc.str() + ": self-loop"});
      } else if (!spec.eligible(a, j) || !spec.eligible(b, j)) {
        out.push_back({loc.str() + ": endpoint not eligible on this channel"});
      }
    }
  }

  if (spec.mode() == Mode::ad_hoc) {
    if (!spec.access_points().empty()) {
      out.push_back({"ad-hoc mode must not declare access points"});
    }
    return out;
  }

  std::vector<std::optional<std::size_t>> owner(spec.num_classes());
  const auto& aps = spec.access_points();
  for (std::size_t i = 0; i < aps.size(); ++i) {
    std::vector<ClassIndex> members = aps[i].uplink;
    members.insert(members.end(), aps[i].downlink.begin(), aps[i].downlink.end());
    std::sort(members.begin(), members.end());
    for (std::size_t m = 0; m + 1 < members.size(); ++m) {
      if (members[m] == members[m + 1]) {
        out.push_back({"access point " + std::to_string(i + 1) + ": " + cls(members[m]) +
                       " is both uplink and downlink"});
      }
    }
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (ClassIndex k : members) {
      if (owner[k]) {
        out.push_back({cls(k) + " assigned to access points " + std::to_string(*owner[k] + 1) +
                       " and " + std::to_string(i + 1)});
      } else {
        owner[k] = i;
      }
    }
    // Classes sharing an access point conflict on every channel they share.
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const ClassIndex k = members[a], l = members[b];
        for (std::size_t j = 0; j < J; ++j) {
          if (spec.eligible(k, j) && spec.eligible(l, j) && !spec.conflicts(k, l, j)) {
            std::ostringstream msg;
            msg << "access point " << i + 1 << ", channel " << j + 1 << ": classes " << k + 1
                << " and " << l + 1
                << " share the access point but have no conflict edge";
            out.push_back({msg.str()});
          }
        }
      }
    }
  }
  return out;
}

std::vector<Violation> validate_params(const NetworkSpec& spec, const CsmaParams& params) {
  std::vector<Violation> out;
  const std::size_t K = spec.num_classes(), J = spec.num_channels();
  if (params.phys_rate.size() != K || params.attempt_rate.size() != K ||
      params.probe_prob.size() != K) {
    out.push_back({"CSMA parameter vectors must have one entry per class"});
    return out;
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!(params.phys_rate[k] > 0.0) || !std::isfinite(params.phys_rate[k])) {
      out.push_back({cls(k) + ": physical rate must be positive"});
    }
    if (!(params.attempt_rate[k] > 0.0) || !std::isfinite(params.attempt_rate[k])) {
      out.push_back({cls(k) + ": attempt rate must be positive"});
    }
    const auto& row = params.probe_prob[k];
    if (row.size() != J) {
      out.push_back({cls(k) + ": probing distribution must have one entry per channel"});
      continue;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double b = row[j];
      if (!(b >= 0.0 && b <= 1.0)) {
        out.push_back({cls(k) + ", channel " + std::to_string(j + 1) +
                       ": probing probability outside [0,1]"});
      }
      if ((b > 0.0) != spec.eligible(k, j)) {
        out.push_back({cls(k) + ", channel " + std::to_string(j + 1) +
                       ": probing probability must be positive exactly on eligible channels"});
      }
      sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      out.push_back({cls(k) + ": probing probabilities sum to " + std::to_string(sum)});
    }
  }
  return out;
}

std::vector<Violation> validate_traffic(const NetworkSpec& spec, const TrafficSpec& traffic) {
  std::vector<Violation> out;
  const std::size_t K = spec.num_classes();
  if (traffic.arrival_rate.size() != K || traffic.mean_flow_size.size() != K) {
    out.push_back({"traffic vectors must have one entry per class"});
    return out;
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!(traffic.arrival_rate[k] >= 0.0) || !std::isfinite(traffic.arrival_rate[k])) {
      out.push_back({cls(k) + ": arrival rate must be nonnegative"});
    }
    if (!(traffic.mean_flow_size[k] > 0.0) || !std::isfinite(traffic.mean_flow_size[k])) {
      out.push_back({cls(k) + ": mean flow size must be positive"});
    }
  }
  return out;
}

std::optional<Partition> detect_l_partite(const NetworkSpec& spec) {
  const std::size_t K = spec.num_classes();
  if (!spec.all_graphs_identical()) {
    throw SpecError("L-partite detection requires the same conflict graph on every channel");
  }
  const std::uint64_t all = K == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << K) - 1;
  if (spec.eligible_mask(0) != all) {
    throw SpecError("L-partite detection requires every class to access every channel");
  }

  // Complete multipartite <=> non-adjacency is an equivalence relation.
  // Blocks are the classes of that relation.
  std::vector<int> block(K, -1);
  Partition parts;
  for (ClassIndex k = 0; k < K; ++k) {
    if (block[k] >= 0) continue;
    block[k] = static_cast<int>(parts.size());
    parts.push_back({k});
    for (ClassIndex l = k + 1; l < K; ++l) {
      if (block[l] < 0 && !spec.conflicts(k, l, 0)) {
        block[l] = block[k];
        parts.back().push_back(l);
      }
    }
  }
  for (ClassIndex k = 0; k < K; ++k) {
    for (ClassIndex l = k + 1; l < K; ++l) {
      const bool same = block[k] == block[l];
      if (same == spec.conflicts(k, l, 0)) return std::nullopt;
    }
  }
  return parts;
}

}  // namespace csma
