#pragma once

// Post-hoc verifier for session logs. It rebuilds the room context from the
// logged readings on its own and re-checks every engine rule against it.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eerec/event.hpp"

namespace eerec {

/// Rule names reported in violations.
namespace audit_rule {
inline constexpr const char* kStructure = "log_structure";
inline constexpr const char* kOrdering = "ordering";
inline constexpr const char* kSinglePending = "single_pending";
inline constexpr const char* kResponseWindow = "response_window";
inline constexpr const char* kMinSpacing = "min_spacing";
inline constexpr const char* kIgnoreCooldown = "ignore_cooldown";
inline constexpr const char* kRejectCooldown = "reject_cooldown";
inline constexpr const char* kEpisodeCease = "episode_cease";
inline constexpr const char* kPermanentPause = "permanent_pause";
inline constexpr const char* kConditions = "conditions_revalidated";
inline constexpr const char* kRulePriority = "rule_priority";
inline constexpr const char* kEpisodeReset = "episode_reset";
inline constexpr const char* kModeFidelity = "mode_fidelity";
inline constexpr const char* kFactSelection = "fact_selection";
inline constexpr const char* kFactValue = "fact_value";
inline constexpr const char* kProfileUpdate = "profile_update";
inline constexpr const char* kActuation = "actuation";
inline constexpr const char* kEnergyClosure = "energy_closure";
}  // namespace audit_rule

struct Violation {
  std::string rule;
  std::uint64_t seq = 0;
  Timestamp time;
  std::string detail;
};

struct AuditReport {
  std::vector<Violation> violations;
  std::size_t events = 0;
  std::size_t recommendations = 0;
  std::size_t responses = 0;
  /// Largest Actual figure quoted per usage period, summed.
  double quoted_kwh = 0.0;
  /// Integral of device power over the log.
  double metered_kwh = 0.0;

  bool ok() const { return violations.empty(); }
};

struct AuditOptions {
  double relative_tolerance = 1e-9;
};

AuditReport audit_log(std::span<const SessionEvent> events, const AuditOptions& opt = {});

void to_json(Json& j, const Violation& v);
void to_json(Json& j, const AuditReport& r);

}  // namespace eerec
