#pragma once

#include <string>
#include <string_view>

namespace csma {

/// Which random-access variant drives the schedule process.
///  - adhoc: every idle link backs off independently (product form with
///    falling factorials).
///  - standard_infra: each access point runs one CSMA instance for all of its
///    downlink flows and picks a flow proportionally to the per-class counts.
///  - flow_aware: each access point runs one instance per downlink flow.
enum class Policy { adhoc, standard_infra, flow_aware };

std::string to_string(Policy p);
/// Accepts "adhoc", "standard_infra", "flow_aware" (and '-' for '_').
Policy parse_policy(std::string_view text);

}  // namespace csma
