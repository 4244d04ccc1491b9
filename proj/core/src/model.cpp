#include "eerec/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <utility>

#include "eerec/errors.hpp"

namespace eerec {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<SensorKind, 5> kSensorKindNames{{{SensorKind::Temperature, "temperature"},
                                                    {SensorKind::Humidity, "humidity"},
                                                    {SensorKind::Luminosity, "luminosity"},
                                                    {SensorKind::Motion, "motion"},
                                                    {SensorKind::DevicePower, "device_power"}}};
constexpr NameTable<Placement, 2> kPlacementNames{{{Placement::Indoor, "indoor"}, {Placement::Outdoor, "outdoor"}}};
constexpr NameTable<ApplianceKind, 3> kApplianceKindNames{{{ApplianceKind::AirConditioner, "air_conditioner"},
                                                          {ApplianceKind::Lights, "lights"},
                                                          {ApplianceKind::Monitor, "monitor"}}};
constexpr NameTable<ReasonKind, 3> kReasonNames{{{ReasonKind::UserAway, "user_away"},
                                                {ReasonKind::OutdoorCoolingAvailable, "outdoor_cooling_available"},
                                                {ReasonKind::NaturalLightAvailable, "natural_light_available"}}};
constexpr NameTable<ScenarioMode, 3> kModeNames{{{ScenarioMode::Plain, "plain"},
                                                {ScenarioMode::Persuasive, "persuasive"},
                                                {ScenarioMode::Explainable, "explainable"}}};
constexpr NameTable<FactType, 2> kFactTypeNames{{{FactType::Eco, "eco"}, {FactType::Econ, "econ"}}};
constexpr NameTable<Projection, 3> kProjectionNames{{{Projection::Actual, "actual"},
                                                    {Projection::Monthly, "monthly"},
                                                    {Projection::Annual, "annual"}}};
constexpr NameTable<Response, 3> kResponseNames{{{Response::Accept, "accept"},
                                                {Response::Reject, "reject"},
                                                {Response::None, "none"}}};
constexpr NameTable<Lifecycle, 5> kLifecycleNames{{{Lifecycle::Pending, "pending"},
                                                  {Lifecycle::Accepted, "accepted"},
                                                  {Lifecycle::Rejected, "rejected"},
                                                  {Lifecycle::Ignored, "ignored"},
                                                  {Lifecycle::Ceased, "ceased"}}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [value, name] : table)
    if (value == v) return name;
  return "?";
}

template <typename E, std::size_t N>
E value_of(const NameTable<E, N>& table, std::string_view name, std::string_view what) {
  for (const auto& [value, n] : table)
    if (n == name) return value;
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(SensorKind v) { return name_of(kSensorKindNames, v); }
std::string_view to_string(Placement v) { return name_of(kPlacementNames, v); }
std::string_view to_string(ApplianceKind v) { return name_of(kApplianceKindNames, v); }
std::string_view to_string(ReasonKind v) { return name_of(kReasonNames, v); }
std::string_view to_string(ScenarioMode v) { return name_of(kModeNames, v); }
std::string_view to_string(FactType v) { return name_of(kFactTypeNames, v); }
std::string_view to_string(Projection v) { return name_of(kProjectionNames, v); }
std::string_view to_string(Response v) { return name_of(kResponseNames, v); }
std::string_view to_string(Lifecycle v) { return name_of(kLifecycleNames, v); }

template <>
SensorKind parse_enum<SensorKind>(std::string_view n) { return value_of(kSensorKindNames, n, "sensor kind"); }
template <>
Placement parse_enum<Placement>(std::string_view n) { return value_of(kPlacementNames, n, "placement"); }
template <>
ApplianceKind parse_enum<ApplianceKind>(std::string_view n) {
  return value_of(kApplianceKindNames, n, "appliance kind");
}
template <>
ReasonKind parse_enum<ReasonKind>(std::string_view n) { return value_of(kReasonNames, n, "reason kind"); }
template <>
ScenarioMode parse_enum<ScenarioMode>(std::string_view n) { return value_of(kModeNames, n, "scenario mode"); }
template <>
FactType parse_enum<FactType>(std::string_view n) { return value_of(kFactTypeNames, n, "fact type"); }
template <>
Projection parse_enum<Projection>(std::string_view n) { return value_of(kProjectionNames, n, "projection"); }
template <>
Response parse_enum<Response>(std::string_view n) { return value_of(kResponseNames, n, "response"); }
template <>
Lifecycle parse_enum<Lifecycle>(std::string_view n) { return value_of(kLifecycleNames, n, "lifecycle"); }

std::string weekday_name(Weekday d) {
  static constexpr std::array<const char*, 7> names{"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  return names[static_cast<int>(d)];
}

std::string format_timestamp(Timestamp t) {
  const auto sod = t.seconds_of_day();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s %02d:%02d:%02d", weekday_name(t.day_of_week()).c_str(),
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
  return buf;
}

bool in_range(const SensorReading& r) {
  if (!std::isfinite(r.value)) return false;
  switch (r.kind) {
    case SensorKind::Temperature:
      return r.value >= -40.0 && r.value <= 80.0;
    case SensorKind::Humidity:
      return r.value >= 0.0 && r.value <= 100.0;
    case SensorKind::Luminosity:
    case SensorKind::DevicePower:
      return r.value >= 0.0;
    case SensorKind::Motion:
      return r.value == 0.0 || r.value == 1.0;
  }
  return false;
}

const Appliance* ContextSnapshot::find(const ApplianceId& id) const {
  auto it = std::find_if(appliances.begin(), appliances.end(), [&](const Appliance& a) { return a.id == id; });
  return it == appliances.end() ? nullptr : &*it;
}

ContextTracker::ContextTracker(std::vector<Appliance> inventory) : appliances_(std::move(inventory)) {}

void ContextTracker::ingest(const SensorReading& r) {
  const bool indoor = r.placement == Placement::Indoor;
  switch (r.kind) {
    case SensorKind::Temperature:
      (indoor ? indoor_temp_ : outdoor_temp_) = r.value;
      break;
    case SensorKind::Humidity:
      (indoor ? indoor_humidity_ : outdoor_humidity_) = r.value;
      break;
    case SensorKind::Luminosity:
      (indoor ? indoor_lux_ : outdoor_lux_) = r.value;
      break;
    case SensorKind::Motion: {
      const bool moving = r.value != 0.0;
      // Several motion sensors may report for the same instant; any trigger counts.
      const bool same_instant = motion_now_ && last_presence_ && *last_presence_ == r.time && *motion_now_;
      if (moving) {
        motion_now_ = true;
        last_presence_ = r.time;
      } else if (!same_instant) {
        motion_now_ = false;
        if (!last_presence_) last_presence_ = r.time;
      }
      break;
    }
    case SensorKind::DevicePower:
      for (auto& a : appliances_) {
        if (a.id != r.sensor) continue;
        const bool on = r.value > 0.0;
        if (on != a.on) {
          a.on = on;
          a.last_toggle = r.time;
        }
      }
      break;
  }
}

void ContextTracker::switch_off(const ApplianceId& id, Timestamp t) {
  for (auto& a : appliances_) {
    if (a.id == id && a.on) {
      a.on = false;
      a.last_toggle = t;
    }
  }
}

std::optional<ContextSnapshot> ContextTracker::snapshot(Timestamp now, Duration absence_threshold) const {
  if (!indoor_temp_ || !outdoor_temp_ || !indoor_lux_ || !outdoor_lux_ || !motion_now_) return std::nullopt;
  ContextSnapshot s;
  s.time = now;
  s.indoor_temp = *indoor_temp_;
  s.outdoor_temp = *outdoor_temp_;
  s.indoor_lux = *indoor_lux_;
  s.outdoor_lux = *outdoor_lux_;
  s.indoor_humidity = indoor_humidity_;
  s.outdoor_humidity = outdoor_humidity_;
  s.absent_for = *motion_now_ ? Duration{0} : std::max(Duration{0}, now - *last_presence_);
  s.room_occupied = s.absent_for < absence_threshold;
  s.appliances = appliances_;
  return s;
}

}  // namespace eerec
