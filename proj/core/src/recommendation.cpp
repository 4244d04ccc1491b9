#include "eerec/recommendation.hpp"

namespace eerec {

void to_json(Json& j, const TriggerReason& r) {
  j = Json{{"kind", r.kind},
           {"indoor_temp", r.indoor_temp},
           {"outdoor_temp", r.outdoor_temp},
           {"indoor_lux", r.indoor_lux},
           {"outdoor_lux", r.outdoor_lux},
           {"absent_for", r.absent_for.count()},
           {"p_occ_next", r.p_occ_next},
           {"room_occupied", r.room_occupied}};
}

void from_json(const Json& j, TriggerReason& r) {
  r.kind = j.at("kind").get<ReasonKind>();
  r.indoor_temp = j.at("indoor_temp").get<double>();
  r.outdoor_temp = j.at("outdoor_temp").get<double>();
  r.indoor_lux = j.at("indoor_lux").get<double>();
  r.outdoor_lux = j.at("outdoor_lux").get<double>();
  r.absent_for = Duration{j.at("absent_for").get<std::int64_t>()};
  r.p_occ_next = j.at("p_occ_next").get<double>();
  r.room_occupied = j.at("room_occupied").get<bool>();
}

void to_json(Json& j, const PersuasiveFact& f) {
  j = Json{{"type", f.type},
           {"projection", f.projection},
           {"requested", f.requested},
           {"rated_kw", f.rated_kw},
           {"usage_hours", f.usage_hours},
           {"weekly_on_hours", f.weekly_on_hours},
           {"energy_kwh", f.energy_kwh},
           {"factor", f.factor},
           {"value", f.value}};
}

void from_json(const Json& j, PersuasiveFact& f) {
  f.type = j.at("type").get<FactType>();
  f.projection = j.at("projection").get<Projection>();
  f.requested = j.value("requested", f.projection);
  f.rated_kw = j.at("rated_kw").get<double>();
  f.usage_hours = j.at("usage_hours").get<double>();
  f.weekly_on_hours = j.at("weekly_on_hours").get<double>();
  f.energy_kwh = j.at("energy_kwh").get<double>();
  f.factor = j.at("factor").get<double>();
  f.value = j.at("value").get<double>();
}

void to_json(Json& j, const Recommendation& r) {
  j = Json{{"id", r.id},
           {"created_at", r.created_at},
           {"appliance", r.appliance},
           {"appliance_kind", r.appliance_kind},
           {"action", "turn_off"},
           {"reason", r.reason},
           {"mode", r.mode},
           {"lifecycle", r.lifecycle},
           {"deadline", r.deadline}};
  if (r.fact) j["fact"] = *r.fact;
  if (r.resolved_at) j["resolved_at"] = *r.resolved_at;
}

void from_json(const Json& j, Recommendation& r) {
  r.id = j.at("id").get<std::uint64_t>();
  r.created_at = j.at("created_at").get<Timestamp>();
  r.appliance = j.at("appliance").get<std::string>();
  r.appliance_kind = j.at("appliance_kind").get<ApplianceKind>();
  r.reason = j.at("reason").get<TriggerReason>();
  r.mode = j.at("mode").get<ScenarioMode>();
  r.lifecycle = j.value("lifecycle", Lifecycle::Pending);
  r.deadline = j.at("deadline").get<Timestamp>();
  r.fact = j.contains("fact") ? std::optional<PersuasiveFact>(j["fact"].get<PersuasiveFact>()) : std::nullopt;
  r.resolved_at = j.contains("resolved_at") ? std::optional<Timestamp>(j["resolved_at"].get<Timestamp>()) : std::nullopt;
}

}  // namespace eerec
