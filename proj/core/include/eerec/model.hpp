#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eerec/time.hpp"

namespace eerec {

enum class SensorKind { Temperature, Humidity, Luminosity, Motion, DevicePower };
enum class Placement { Indoor, Outdoor };
enum class ApplianceKind { AirConditioner, Lights, Monitor };

enum class ReasonKind { UserAway, OutdoorCoolingAvailable, NaturalLightAvailable };
enum class ScenarioMode { Plain, Persuasive, Explainable };
enum class FactType { Eco, Econ };
enum class Projection { Actual, Monthly, Annual };
/// User reaction to a recommendation. `None` means the response window elapsed.
enum class Response { Accept, Reject, None };
enum class Lifecycle { Pending, Accepted, Rejected, Ignored, Ceased };

std::string_view to_string(SensorKind v);
std::string_view to_string(Placement v);
std::string_view to_string(ApplianceKind v);
std::string_view to_string(ReasonKind v);
std::string_view to_string(ScenarioMode v);
std::string_view to_string(FactType v);
std::string_view to_string(Projection v);
std::string_view to_string(Response v);
std::string_view to_string(Lifecycle v);

/// Parses the names produced by to_string(); throws ValidationError otherwise.
template <typename E>
E parse_enum(std::string_view name);

inline constexpr ReasonKind kAllReasons[] = {ReasonKind::UserAway, ReasonKind::OutdoorCoolingAvailable,
                                             ReasonKind::NaturalLightAvailable};
inline constexpr ScenarioMode kAllModes[] = {ScenarioMode::Plain, ScenarioMode::Persuasive,
                                             ScenarioMode::Explainable};
inline constexpr FactType kAllFactTypes[] = {FactType::Eco, FactType::Econ};
inline constexpr Projection kAllProjections[] = {Projection::Actual, Projection::Monthly, Projection::Annual};

using SensorId = std::string;
using ApplianceId = std::string;

struct SensorReading {
  Timestamp time;
  SensorId sensor;
  SensorKind kind = SensorKind::Temperature;
  Placement placement = Placement::Indoor;
  double value = 0.0;

  bool operator==(const SensorReading&) const = default;
};

/// True when the value lies inside the physical range of its kind
/// (DHT-22 style temperature/humidity ranges, non-negative lux and power, binary motion).
bool in_range(const SensorReading& r);

struct Appliance {
  ApplianceId id;
  ApplianceKind kind = ApplianceKind::AirConditioner;
  double rated_kw = 0.0;
  bool on = false;
  Timestamp last_toggle;

  bool operator==(const Appliance&) const = default;
};

struct ContextSnapshot {
  Timestamp time;
  double indoor_temp = 0.0;
  double outdoor_temp = 0.0;
  double indoor_lux = 0.0;
  double outdoor_lux = 0.0;
  std::optional<double> indoor_humidity;
  std::optional<double> outdoor_humidity;
  /// Motion seen within the absence threshold.
  bool room_occupied = false;
  /// Time since the last motion; zero while motion is being reported.
  Duration absent_for{0};
  std::vector<Appliance> appliances;

  const Appliance* find(const ApplianceId& id) const;
};

/// Folds a reading stream into the latest known context.
///
/// Environmental values are keyed by (kind, placement); device-power readings
/// are keyed by sensor id, which must equal the appliance id.
class ContextTracker {
 public:
  ContextTracker() = default;
  explicit ContextTracker(std::vector<Appliance> inventory);

  void ingest(const SensorReading& r);
  /// Marks an appliance off as the result of an actuation.
  void switch_off(const ApplianceId& id, Timestamp t);

  /// Snapshot at `now`; empty until every environmental input and motion has reported.
  std::optional<ContextSnapshot> snapshot(Timestamp now, Duration absence_threshold) const;

  const std::vector<Appliance>& appliances() const { return appliances_; }

  bool operator==(const ContextTracker&) const = default;

  friend void to_json(nlohmann::json& j, const ContextTracker& t);

 private:
  std::optional<double> indoor_temp_, outdoor_temp_, indoor_lux_, outdoor_lux_;
  std::optional<double> indoor_humidity_, outdoor_humidity_;
  std::optional<bool> motion_now_;
  std::optional<Timestamp> last_presence_;
  std::vector<Appliance> appliances_;
};

}  // namespace eerec
