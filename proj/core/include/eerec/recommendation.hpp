#pragma once

#include <cstdint>
#include <optional>

#include "eerec/json.hpp"
#include "eerec/model.hpp"

namespace eerec {

/// Why a turn-off was proposed, with the context values the rule looked at.
struct TriggerReason {
  ReasonKind kind = ReasonKind::UserAway;
  double indoor_temp = 0.0;
  double outdoor_temp = 0.0;
  double indoor_lux = 0.0;
  double outdoor_lux = 0.0;
  Duration absent_for{0};
  /// Occupancy probability of the next slot (UserAway only).
  double p_occ_next = 0.0;
  bool room_occupied = false;

  bool operator==(const TriggerReason&) const = default;
};

/// Eco/Econ figure attached to a recommendation.
///
/// For Actual facts energy_kwh = rated_kw * usage_hours; for Monthly/Annual
/// facts it is the projected consumption of the weekly habit. `value` is
/// energy_kwh times the tariff (Econ) or the emission factor (Eco).
struct PersuasiveFact {
  FactType type = FactType::Econ;
  Projection projection = Projection::Actual;
  /// Projection the caller asked for; differs from `projection` on fallback.
  Projection requested = Projection::Actual;
  double rated_kw = 0.0;
  double usage_hours = 0.0;
  double weekly_on_hours = 0.0;
  double energy_kwh = 0.0;
  double factor = 0.0;  // EUR/kWh or kg CO2/kWh
  double value = 0.0;   // EUR or kg CO2

  bool operator==(const PersuasiveFact&) const = default;
};

struct Recommendation {
  std::uint64_t id = 0;
  Timestamp created_at;
  ApplianceId appliance;
  ApplianceKind appliance_kind = ApplianceKind::AirConditioner;
  TriggerReason reason;
  ScenarioMode mode = ScenarioMode::Plain;
  std::optional<PersuasiveFact> fact;
  Lifecycle lifecycle = Lifecycle::Pending;
  Timestamp deadline;
  std::optional<Timestamp> resolved_at;

  bool operator==(const Recommendation&) const = default;
};

void to_json(Json& j, const TriggerReason& r);
void from_json(const Json& j, TriggerReason& r);
void to_json(Json& j, const PersuasiveFact& f);
void from_json(const Json& j, PersuasiveFact& f);
void to_json(Json& j, const Recommendation& r);
void from_json(const Json& j, Recommendation& r);

}  // namespace eerec
