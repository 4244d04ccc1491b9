#pragma once

// Session event log: the append-only record every state change flows through.
// Serialized as JSON Lines with a schema version field "v": 1.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "eerec/engine.hpp"
#include "eerec/explain.hpp"
#include "eerec/knowledge.hpp"

namespace eerec {

inline constexpr int kLogSchemaVersion = 1;

/// Everything needed to start a session from an empty state.
struct SessionSetup {
  std::string session_id;
  std::string user;
  std::string spec_id;
  ScenarioMode mode = ScenarioMode::Explainable;
  std::uint64_t seed = 0;
  EngineConfig engine;
  TariffPreset tariff = paper_example_preset();
  ProjectionPolicy projection;
  AdaptConfig adapt;
  KnowledgeBase kb;
  std::vector<Appliance> appliances;

  bool operator==(const SessionSetup&) const = default;
};

struct SessionStarted {
  SessionSetup setup;
  bool operator==(const SessionStarted&) const = default;
};

struct ReadingIngested {
  SensorReading reading;
  bool operator==(const ReadingIngested&) const = default;
};

struct MicroMomentDetected {
  MicroMomentKind kind = MicroMomentKind::UserExit;
  std::optional<ApplianceId> appliance;
  std::optional<ReasonKind> favorable;
  bool operator==(const MicroMomentDetected&) const = default;
};

struct RecommendationIssued {
  Recommendation rec;
  RecommendationMessage message;
  /// Uniform draws consumed for fact type / projection, in order.
  std::vector<double> draws;
  /// Engine stream position after the draws.
  std::uint64_t rng_draws = 0;
  bool operator==(const RecommendationIssued&) const = default;
};

struct ResponseRecorded {
  std::uint64_t rec_id = 0;
  Response response = Response::None;
  bool operator==(const ResponseRecorded&) const = default;
};

struct ActuationApplied {
  ApplianceId appliance;
  std::optional<std::uint64_t> rec_id;
  bool applied = true;
  bool automatic = false;
  std::string ack;
  bool operator==(const ActuationApplied&) const = default;
};

struct ProfileUpdated {
  std::uint64_t rec_id = 0;
  FactType fact = FactType::Eco;
  Projection projection = Projection::Actual;
  Response response = Response::None;
  double w_eco = 1.0;
  double w_econ = 1.0;
  bool operator==(const ProfileUpdated&) const = default;
};

enum class ResetCause { ConditionCleared, ReEnabled };

/// Ends a trigger episode (condition no longer holds) or lifts a permanent pause.
struct ReissueReset {
  ApplianceId appliance;
  ReasonKind reason = ReasonKind::UserAway;
  ResetCause cause = ResetCause::ConditionCleared;
  bool operator==(const ReissueReset&) const = default;
};

struct SessionFinished {
  bool operator==(const SessionFinished&) const = default;
};

using EventPayload = std::variant<SessionStarted, ReadingIngested, MicroMomentDetected, RecommendationIssued,
                                  ResponseRecorded, ActuationApplied, ProfileUpdated, ReissueReset, SessionFinished>;

struct SessionEvent {
  std::uint64_t seq = 0;
  Timestamp time;
  EventPayload payload;

  bool operator==(const SessionEvent&) const = default;
};

std::string_view event_type(const EventPayload& p);

/// Single-writer append-only log. Sequence numbers start at 1 and grow by
/// exactly one; times never go backwards.
class EventLog {
 public:
  /// Throws OrderingError on a sequence gap or a time regression.
  void append(SessionEvent e);

  std::uint64_t last_seq() const { return events_.empty() ? 0 : events_.back().seq; }
  std::optional<Timestamp> last_time() const {
    return events_.empty() ? std::nullopt : std::optional<Timestamp>(events_.back().time);
  }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::span<const SessionEvent> events() const { return events_; }
  /// Events with seq > after.
  std::span<const SessionEvent> since(std::uint64_t after) const;

 private:
  std::vector<SessionEvent> events_;
};

void to_json(Json& j, const SessionSetup& s);
void from_json(const Json& j, SessionSetup& s);
void to_json(Json& j, const SessionEvent& e);
void from_json(const Json& j, SessionEvent& e);

std::string to_jsonl_line(const SessionEvent& e);
void write_log_jsonl(std::ostream& out, std::span<const SessionEvent> events);
/// Parses and validates ordering; errors carry the offending line number.
EventLog read_log_jsonl(std::istream& in);
EventLog read_log_file(const std::string& path);

}  // namespace eerec
