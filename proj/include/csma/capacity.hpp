#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "csma/schedule.hpp"
#include "csma/simplex.hpp"
#include "csma/topology.hpp"

namespace csma {

enum class RegionStatus { interior, boundary, exterior };
std::string to_string(RegionStatus s);

/// The LP solver failed to reach an optimum.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CapacityVerdict {
  RegionStatus status = RegionStatus::exterior;
  /// Largest t with t*rho achievable (infinite when rho = 0).
  double scale = 0.0;
  /// scale - 1: positive inside, negative outside.
  double margin = 0.0;
  /// Schedule distribution over Y achieving scale * rho.
  std::vector<ScheduleMass> certificate;
};

/// Verdicts with |scale - 1| within this band are reported as boundary.
inline constexpr double kBoundaryBand = 1e-9;

/// Capacity-region membership of the load vector rho: maximizes t subject to
/// t rho_k <= phi_k sum_y y_k pi(y) for every loaded class, over
/// distributions pi on Y.
CapacityVerdict membership(const std::vector<double>& rho, const NetworkSpec& spec,
                           const CsmaParams& params, const EnumerationLimits& limits = {},
                           const SimplexOptions& lp_options = {});

/// Mixes the certificate with the uniform distribution on Y at weight
/// min(margin/2, 1e-3), giving every schedule positive mass while still
/// covering rho. Requires an interior verdict.
std::vector<ScheduleMass> full_support_certificate(const CapacityVerdict& verdict,
                                                   const NetworkSpec& spec,
                                                   const EnumerationLimits& limits = {});

struct LPartiteVerdict {
  bool interior;
  /// J - sum_l max_{k in C_l} rho_k / phi_k.
  double slack;
};

/// Closed-form capacity test for complete multipartite conflict graphs.
/// Throws SpecError when the spec is not L-partite.
LPartiteVerdict lpartite_condition(const std::vector<double>& rho, const NetworkSpec& spec,
                                   const CsmaParams& params);

/// sum_l max_{k in C_l} rho_k / phi_k for a given partition.
double lpartite_load(const std::vector<double>& rho, const Partition& partition,
                     const CsmaParams& params);

}  // namespace csma
