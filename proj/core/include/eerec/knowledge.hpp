#pragma once

// Knowledge abstraction: slot aggregation, occupancy and habit profiles,
// and micro-moment detection over context snapshots.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "eerec/adapt.hpp"
#include "eerec/json.hpp"
#include "eerec/model.hpp"

namespace eerec {

struct Thresholds {
  Duration absence{300};
  Duration extended_use{3 * 3600};
  /// Outdoor must be at least this much cooler than indoor for window cooling.
  double delta_t = 1.0;
  double natural_light_lux = 10000.0;

  bool operator==(const Thresholds&) const = default;
};

/// Outdoor air cool enough to replace the A/C.
bool cooling_available(const ContextSnapshot& s, const Thresholds& th);
/// Daylight bright enough to replace the lights.
bool natural_light_available(const ContextSnapshot& s, const Thresholds& th);

struct SlotKey {
  Weekday day = Weekday::Monday;
  int slot = 0;

  auto operator<=>(const SlotKey&) const = default;
};

inline SlotKey slot_key(Timestamp t) { return {t.day_of_week(), slot_of(t)}; }

struct SlotAggregate {
  SlotKey key;
  /// Week instances that contributed any reading / any motion=1 to this cell.
  std::set<std::int64_t> observed_weeks;
  std::set<std::int64_t> present_weeks;
  std::map<std::pair<SensorKind, Placement>, std::pair<double, std::int64_t>> sums;  // sum, count

  int presence_count() const { return static_cast<int>(present_weeks.size()); }
  int observation_count() const { return static_cast<int>(observed_weeks.size()); }
  std::optional<double> mean(SensorKind kind, Placement placement) const;

  bool operator==(const SlotAggregate&) const = default;
};

class AggregateSet {
 public:
  /// Adds one reading; out-of-range readings are counted in rejects() and skipped.
  void add(const SensorReading& r);
  void merge(const AggregateSet& other);

  const SlotAggregate* find(SlotKey key) const;
  const std::map<SlotKey, SlotAggregate>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }
  std::size_t rejects() const { return rejects_; }

  bool operator==(const AggregateSet&) const = default;

 private:
  std::map<SlotKey, SlotAggregate> cells_;
  std::size_t rejects_ = 0;
};

AggregateSet aggregate(std::span<const SensorReading> readings);

struct OccupancyProfile {
  /// p[day][slot]; held on the heap so profiles stay cheap to move around.
  std::vector<std::array<double, kSlotsPerDay>> p = std::vector<std::array<double, kSlotsPerDay>>(kDaysPerWeek);
  int window_weeks = 0;

  double at(SlotKey k) const { return p[static_cast<int>(k.day)][k.slot]; }
  double at(Timestamp t) const { return at(slot_key(t)); }

  bool operator==(const OccupancyProfile&) const = default;
};

/// presence / observations per cell; unobserved cells are 0.
/// Throws ValidationError("insufficient history") when `aggregates` is empty.
OccupancyProfile occupancy_profile(const AggregateSet& aggregates, int window_weeks);

struct Transition {
  Timestamp time;
  bool on = false;

  bool operator==(const Transition&) const = default;
};

struct ApplianceHistory {
  std::vector<Transition> transitions;
  /// Instant the observation window closes; open on-intervals are cut here.
  Timestamp end;
};

/// On/off transitions per appliance, extracted from device-power readings.
std::map<ApplianceId, ApplianceHistory> appliance_histories(std::span<const SensorReading> readings);

struct ApplianceHabit {
  double weekly_on_hours = 0.0;
  std::vector<SlotKey> typical_on_slots;
  /// Mean outdoor temperature in the cells where the appliance was switched on.
  std::optional<double> outdoor_temp_at_on;

  bool operator==(const ApplianceHabit&) const = default;
};

struct HabitProfile {
  std::map<ApplianceId, ApplianceHabit> appliances;

  double weekly_on_hours(const ApplianceId& id) const;

  bool operator==(const HabitProfile&) const = default;
};

/// Expected weekly on-hours is total on-time / weeks; a (day, slot) is typical
/// when on-transitions land in it in at least `typical_fraction` of the weeks.
HabitProfile habit_profile(const AggregateSet& aggregates, const std::map<ApplianceId, ApplianceHistory>& histories,
                           int weeks, double typical_fraction = 0.5);

enum class MicroMomentKind { UserExit, UserEnter, DeviceOnExtended, ContextFavorable };

std::string_view to_string(MicroMomentKind k);

struct MicroMoment {
  Timestamp time;
  MicroMomentKind kind = MicroMomentKind::UserExit;
  std::optional<ApplianceId> appliance;
  /// Which favorable condition appeared, for ContextFavorable.
  std::optional<ReasonKind> favorable;
  ContextSnapshot snapshot;
};

/// Edge-triggered detection between two consecutive snapshots. Returns nothing
/// while either snapshot is still missing (warm-up).
std::vector<MicroMoment> detect_micro_moments(const std::optional<ContextSnapshot>& current,
                                              const std::optional<ContextSnapshot>& previous,
                                              const Thresholds& th);

struct KnowledgeBase {
  OccupancyProfile occupancy;
  HabitProfile habits;
  Thresholds thresholds;
  Timestamp generated_at;
  int window_weeks = 3;
  PersuasionProfile profile;
  std::size_t rejected_readings = 0;

  bool operator==(const KnowledgeBase&) const = default;
};

/// Builds a knowledge base from the last `window_weeks` weeks of `readings`.
KnowledgeBase build_knowledge(std::span<const SensorReading> readings, int window_weeks,
                              const Thresholds& thresholds = {});

void to_json(Json& j, const Thresholds& t);
void from_json(const Json& j, Thresholds& t);
void to_json(Json& j, const HabitProfile& h);
void from_json(const Json& j, HabitProfile& h);
void to_json(Json& j, const OccupancyProfile& p);
void from_json(const Json& j, OccupancyProfile& p);
void to_json(Json& j, const KnowledgeBase& kb);
void from_json(const Json& j, KnowledgeBase& kb);

}  // namespace eerec
