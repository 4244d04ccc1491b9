#include "eerec/json.hpp"

#include <fstream>
#include <sstream>

namespace eerec {

void to_json(Json& j, Timestamp t) { j = t.seconds; }
void from_json(const Json& j, Timestamp& t) { t = Timestamp{j.get<std::int64_t>()}; }

#define EEREC_DEFINE_ENUM_JSON(E)                                                 \
  void to_json(Json& j, E v) { j = std::string(to_string(v)); }                   \
  void from_json(const Json& j, E& v) { v = parse_enum<E>(j.get<std::string>()); }

EEREC_DEFINE_ENUM_JSON(SensorKind)
EEREC_DEFINE_ENUM_JSON(Placement)
EEREC_DEFINE_ENUM_JSON(ApplianceKind)
EEREC_DEFINE_ENUM_JSON(ReasonKind)
EEREC_DEFINE_ENUM_JSON(ScenarioMode)
EEREC_DEFINE_ENUM_JSON(FactType)
EEREC_DEFINE_ENUM_JSON(Projection)
EEREC_DEFINE_ENUM_JSON(Response)
EEREC_DEFINE_ENUM_JSON(Lifecycle)

#undef EEREC_DEFINE_ENUM_JSON

void to_json(Json& j, const SensorReading& r) {
  j = Json{{"t", r.time}, {"sensor", r.sensor}, {"kind", r.kind}, {"placement", r.placement}, {"value", r.value}};
}

void from_json(const Json& j, SensorReading& r) {
  r.time = j.at("t").get<Timestamp>();
  r.sensor = j.at("sensor").get<std::string>();
  r.kind = j.at("kind").get<SensorKind>();
  r.placement = j.value("placement", Placement::Indoor);
  r.value = j.at("value").get<double>();
}

void to_json(Json& j, const Appliance& a) {
  j = Json{{"id", a.id}, {"kind", a.kind}, {"rated_kw", a.rated_kw}, {"on", a.on}, {"last_toggle", a.last_toggle}};
}

void from_json(const Json& j, Appliance& a) {
  a.id = j.at("id").get<std::string>();
  a.kind = j.at("kind").get<ApplianceKind>();
  a.rated_kw = j.at("rated_kw").get<double>();
  if (!(a.rated_kw > 0.0)) throw ValidationError("appliance '" + a.id + "': rated_kw must be > 0");
  a.on = j.value("on", false);
  a.last_toggle = j.value("last_toggle", Timestamp{});
}

void to_json(Json& j, const ContextSnapshot& s) {
  j = Json{{"t", s.time},
           {"indoor_temp", s.indoor_temp},
           {"outdoor_temp", s.outdoor_temp},
           {"indoor_lux", s.indoor_lux},
           {"outdoor_lux", s.outdoor_lux},
           {"room_occupied", s.room_occupied},
           {"absent_for", s.absent_for.count()},
           {"appliances", s.appliances}};
  if (s.indoor_humidity) j["indoor_humidity"] = *s.indoor_humidity;
  if (s.outdoor_humidity) j["outdoor_humidity"] = *s.outdoor_humidity;
}

void from_json(const Json& j, ContextSnapshot& s) {
  s.time = j.at("t").get<Timestamp>();
  s.indoor_temp = j.at("indoor_temp").get<double>();
  s.outdoor_temp = j.at("outdoor_temp").get<double>();
  s.indoor_lux = j.at("indoor_lux").get<double>();
  s.outdoor_lux = j.at("outdoor_lux").get<double>();
  s.room_occupied = j.at("room_occupied").get<bool>();
  s.absent_for = Duration{j.at("absent_for").get<std::int64_t>()};
  s.appliances = j.at("appliances").get<std::vector<Appliance>>();
  if (j.contains("indoor_humidity")) s.indoor_humidity = j["indoor_humidity"].get<double>();
  if (j.contains("outdoor_humidity")) s.outdoor_humidity = j["outdoor_humidity"].get<double>();
}

void to_json(Json& j, const ContextTracker& t) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  j = Json{{"indoor_temp", opt(t.indoor_temp_)},
           {"outdoor_temp", opt(t.outdoor_temp_)},
           {"indoor_lux", opt(t.indoor_lux_)},
           {"outdoor_lux", opt(t.outdoor_lux_)},
           {"indoor_humidity", opt(t.indoor_humidity_)},
           {"outdoor_humidity", opt(t.outdoor_humidity_)},
           {"motion_now", t.motion_now_ ? Json(*t.motion_now_) : Json(nullptr)},
           {"last_presence", t.last_presence_ ? Json(*t.last_presence_) : Json(nullptr)},
           {"appliances", t.appliances_}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Report the line the parser stopped on.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError(path + ": " + e.what(), line);
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::vector<SensorReading> read_readings_jsonl(std::istream& in) {
  std::vector<SensorReading> out;
  for_each_json_line(in, [&](const Json& j, std::size_t) { out.push_back(j.get<SensorReading>()); });
  return out;
}

void write_readings_jsonl(std::ostream& out, const std::vector<SensorReading>& readings) {
  for (const auto& r : readings) out << Json(r).dump() << '\n';
}

}  // namespace eerec
