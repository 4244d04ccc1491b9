#pragma once

// Action triggering: turn-off rules, the per-(appliance, reason) re-issue
// state machine, and actuation.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eerec/json.hpp"
#include "eerec/knowledge.hpp"
#include "eerec/recommendation.hpp"

namespace eerec {

struct TimingConfig {
  Duration response_window{20};
  Duration ignore_pause{600};
  Duration reject_pause{3600};
  /// Re-issues of one episode stop this long after its first issue.
  Duration episode_window{3600};
  Duration evaluation_period{60};

  bool operator==(const TimingConfig&) const = default;
};

struct RuleToggles {
  bool user_away = true;
  bool outdoor_cooling = true;
  bool natural_light = true;

  bool operator==(const RuleToggles&) const = default;
};

struct EngineConfig {
  Thresholds thresholds;
  double occupancy_cutoff = 0.5;
  int n_auto = 5;
  int n_perm = 3;
  RuleToggles rules;
  /// Turn off automation candidates without asking. Off by default: the
  /// engine only flags them.
  bool auto_execute = false;
  TimingConfig timing;

  bool operator==(const EngineConfig&) const = default;
};

enum class ReissueStatus { Active, Pending, Paused, Ceased, PermanentlyPaused };

std::string_view to_string(ReissueStatus s);

struct ReissueEntry {
  ReissueStatus status = ReissueStatus::Active;
  /// First issue of the current episode.
  std::optional<Timestamp> episode_start;
  std::optional<Timestamp> paused_until;
  std::optional<Timestamp> last_issued;
  int consecutive_rejects = 0;
  int accept_count = 0;
  bool automation_candidate = false;

  bool operator==(const ReissueEntry&) const = default;
};

using ReissueKey = std::pair<ApplianceId, ReasonKind>;

struct ReissueState {
  std::map<ReissueKey, ReissueEntry> entries;

  ReissueEntry get(const ReissueKey& key) const;

  bool operator==(const ReissueState&) const = default;
};

/// True when no recommendation may be issued for this key at `now`.
bool suppressed(const ReissueEntry& e, Timestamp now, const TimingConfig& timing);

/// Evaluates one rule for one appliance, ignoring re-issue state.
std::optional<TriggerReason> rule_fires(ReasonKind rule, const Appliance& appliance, const ContextSnapshot& snapshot,
                                        const OccupancyProfile& occupancy, const EngineConfig& cfg);

/// Rules in priority order UserAway > OutdoorCoolingAvailable > NaturalLightAvailable,
/// at most one candidate per appliance, appliances in inventory order. The
/// first rule that holds claims the appliance even when its key is suppressed.
/// Candidates carry id 0 and no fact; the session assigns both when issuing.
std::vector<Recommendation> evaluate_triggers(const ContextSnapshot& snapshot, const KnowledgeBase& kb,
                                              const ReissueState& reissue, ScenarioMode mode,
                                              const EngineConfig& cfg);

/// Opens (or continues) an episode and marks the key as awaiting a response.
ReissueEntry note_issued(ReissueEntry e, Timestamp now);

struct ResponseOutcome {
  Recommendation rec;
  ReissueEntry entry;
  /// Accepted: the appliance must be switched off.
  bool actuate = false;
};

/// Resolves a pending recommendation.
///
/// accept/reject must arrive no later than the deadline, `None` no earlier.
/// Throws ConflictError (AlreadyResolved, WindowElapsed, NotYetDue).
/// The returned entry already has apply_profile_rules() applied.
ResponseOutcome record_response(const Recommendation& rec, Response response, Timestamp now,
                                const ReissueEntry& entry, const EngineConfig& cfg);

/// Automation candidacy after n_auto accepts; permanent pause after n_perm consecutive rejects.
ReissueEntry apply_profile_rules(ReissueEntry e, const EngineConfig& cfg);

/// Trigger condition cleared: the episode ends; cooldowns carry over.
ReissueEntry close_episode(ReissueEntry e);
/// Explicit user re-enable of a permanently paused key.
ReissueEntry re_enable(ReissueEntry e);

struct ActuationResult {
  bool applied = false;
  std::string ack;
};

/// Switches an appliance off. An appliance that is already off is left
/// untouched and reported as not applied.
ActuationResult actuate(Appliance& appliance, Timestamp now);

void to_json(Json& j, const TimingConfig& t);
void from_json(const Json& j, TimingConfig& t);
void to_json(Json& j, const EngineConfig& c);
void from_json(const Json& j, EngineConfig& c);
void to_json(Json& j, const ReissueEntry& e);
void from_json(const Json& j, ReissueEntry& e);

}  // namespace eerec
