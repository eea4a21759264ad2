#pragma once

#include <vector>

#include "csma/topology.hpp"

namespace testing_helpers {

using csma::ChannelGraph;
using csma::NetworkSpec;

/// Graph from 1-based edge pairs on classes 1..K.
inline ChannelGraph graph(std::size_t K, std::initializer_list<std::pair<int, int>> edges) {
  ChannelGraph g;
  for (std::size_t k = 0; k < K; ++k) g.eligible.push_back(k);
  for (auto [a, b] : edges) g.edges.emplace_back(a - 1, b - 1);
  return g;
}

/// Five access points with one downlink class each; two triangles sharing class 3.
inline NetworkSpec bowtie(std::size_t J = 2) {
  std::vector<csma::AccessPoint> aps(5);
  for (std::size_t k = 0; k < 5; ++k) aps[k].downlink = {k};
  return NetworkSpec::replicated(5, J, graph(5, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}}),
                                 csma::Mode::infrastructure, aps);
}

/// Complete bipartite {1,2,3} x {4,5,6}.
inline NetworkSpec k33(std::size_t J = 1) {
  return NetworkSpec::replicated(
      6, J, graph(6, {{1, 4}, {1, 5}, {1, 6}, {2, 4}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {3, 6}}));
}

/// Path 1-2-3-4.
inline NetworkSpec path4(std::size_t J = 2) {
  return NetworkSpec::replicated(4, J, graph(4, {{1, 2}, {2, 3}, {3, 4}}));
}

}  // namespace testing_helpers
