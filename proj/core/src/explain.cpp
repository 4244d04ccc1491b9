#include "eerec/explain.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "eerec/errors.hpp"
#include "embedded_data.hpp"

namespace eerec {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string substitute(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
      text.replace(pos, token.size(), value);
  }
  return text;
}

}  // namespace

TariffPreset paper_example_preset() { return {"paper-example", 0.165, 0.3}; }

TariffPreset tariff_preset(const std::string& name) {
  if (name == "paper-example") return paper_example_preset();
  throw NotFoundError("unknown tariff preset '" + name + "'");
}

PersuasiveFact compute_savings(const Appliance& appliance, Timestamp on_since, Timestamp now, double tariff_eur_per_kwh,
                               double emission_kg_per_kwh, double weekly_on_hours, FactType type,
                               Projection projection) {
  if (now < on_since) throw ValidationError("usage ends before it starts");
  if (!(tariff_eur_per_kwh > 0.0) || !(emission_kg_per_kwh > 0.0))
    throw ValidationError("tariff and emission factor must be > 0");
  if (weekly_on_hours < 0.0) throw ValidationError("weekly on-hours must be >= 0");

  PersuasiveFact f;
  f.type = type;
  f.requested = projection;
  f.projection = projection;
  f.rated_kw = appliance.rated_kw;
  f.usage_hours = hours(now - on_since);
  f.weekly_on_hours = weekly_on_hours;
  f.factor = type == FactType::Eco ? emission_kg_per_kwh : tariff_eur_per_kwh;
  if (projection != Projection::Actual && weekly_on_hours <= 0.0) f.projection = Projection::Actual;

  switch (f.projection) {
    case Projection::Actual:
      f.energy_kwh = appliance.rated_kw * f.usage_hours;
      break;
    case Projection::Monthly:
      f.energy_kwh = appliance.rated_kw * (weekly_on_hours * kWeeksPerMonth);
      break;
    case Projection::Annual:
      f.energy_kwh = appliance.rated_kw * (weekly_on_hours * kWeeksPerYear);
      break;
  }
  f.value = f.energy_kwh * f.factor;
  return f;
}

FactType select_fact_type(const PersuasionProfile& profile, double u) {
  return u < profile.p_eco() ? FactType::Eco : FactType::Econ;
}

Projection select_projection(const ProjectionPolicy& policy, double u) {
  if (!policy.uniform) return policy.fixed;
  const auto i = static_cast<int>(u * 3.0);
  return kAllProjections[i > 2 ? 2 : i];
}

Projection select_projection(const ProjectionPolicy& policy, Rng& rng) {
  if (!policy.uniform) return policy.fixed;
  return select_projection(policy, rng.uniform());
}

double round_display(double v) {
  // The small bias keeps exact decimal halves (1.005) from rounding down
  // because of their binary representation.
  const double scaled = std::abs(v) * 100.0;
  const double r = std::floor(scaled + 0.5 + 1e-9) / 100.0;
  return v < 0 ? -r : r;
}

std::string format_amount(double v) { return fixed(round_display(v), 2); }

const MessageTemplates& MessageTemplates::defaults() {
  static const MessageTemplates t = Json::parse(embedded::kMessageTemplates).get<MessageTemplates>();
  return t;
}

MessageTemplates load_templates(const std::string& path) { return read_json_file(path).get<MessageTemplates>(); }

RecommendationMessage compose_message(const Recommendation& rec, const ContextSnapshot& snapshot,
                                      const std::optional<PersuasiveFact>& fact, ScenarioMode mode,
                                      const MessageTemplates& templates) {
  if (mode == ScenarioMode::Plain && fact) throw ValidationError("plain messages carry no fact");
  if (mode != ScenarioMode::Plain && !fact) throw ValidationError("persuasive messages need a fact");

  auto name_it = templates.appliance_names.find(rec.appliance_kind);
  const std::string appliance = name_it != templates.appliance_names.end() ? name_it->second : rec.appliance;

  std::map<std::string, std::string> values{
      {"appliance", appliance},
      {"indoor_temp", fixed(snapshot.indoor_temp, 1)},
      {"outdoor_temp", fixed(snapshot.outdoor_temp, 1)},
      {"indoor_lux", fixed(snapshot.indoor_lux, 0)},
      {"outdoor_lux", fixed(snapshot.outdoor_lux, 0)},
      {"absent_min", std::to_string(snapshot.absent_for.count() / 60)},
  };

  RecommendationMessage msg;
  msg.rec_id = rec.id;
  msg.mode = mode;
  msg.time = rec.created_at;
  msg.timestamp = format_timestamp(rec.created_at);
  msg.prompt = substitute(templates.prompt, values);
  msg.options = templates.options;

  if (mode == ScenarioMode::Explainable) {
    msg.context = ContextBlock{snapshot.indoor_temp, snapshot.outdoor_temp, snapshot.indoor_lux, snapshot.outdoor_lux,
                               snapshot.room_occupied};
    auto it = templates.reasons.find(rec.reason.kind);
    if (it == templates.reasons.end())
      throw ValidationError("no reason template for " + std::string(to_string(rec.reason.kind)));
    msg.reason = substitute(it->second, values);
  }

  if (fact) {
    values["energy_kwh"] = format_amount(fact->energy_kwh);
    values["value"] = format_amount(fact->value);
    values["hours"] = fixed(fact->usage_hours, 1);
    values["weekly_hours"] = fixed(fact->weekly_on_hours, 1);
    const auto& by_type = templates.facts.at(fact->type);
    auto it = by_type.find(fact->projection);
    if (it == by_type.end()) throw ValidationError("no fact template for this projection");
    msg.fact = FactSection{fact->type,  fact->projection,
                           fact->energy_kwh, fact->value,
                           fact->type == FactType::Eco ? "kg CO2" : "EUR",
                           substitute(it->second, values)};
  }
  return msg;
}

bool message_conforms(const RecommendationMessage& msg, ScenarioMode mode) {
  if (msg.mode != mode || msg.timestamp.empty() || msg.prompt.empty() || msg.options.size() != 2) return false;
  switch (mode) {
    case ScenarioMode::Plain:
      return !msg.context && !msg.reason && !msg.fact;
    case ScenarioMode::Persuasive:
      return !msg.context && !msg.reason && msg.fact.has_value();
    case ScenarioMode::Explainable:
      return msg.context.has_value() && msg.reason.has_value() && msg.fact.has_value();
  }
  return false;
}

std::string render_text(const RecommendationMessage& msg) {
  std::ostringstream out;
  out << "[" << msg.timestamp << "]\n";
  if (msg.context) {
    const auto& c = *msg.context;
    out << "  Temperature  in " << fixed(c.indoor_temp, 1) << " °C / out " << fixed(c.outdoor_temp, 1) << " °C\n"
        << "  Light        in " << fixed(c.indoor_lux, 0) << " lx / out " << fixed(c.outdoor_lux, 0) << " lx\n"
        << "  Presence     " << (c.occupied ? "in the room" : "away") << "\n";
  }
  if (msg.reason) out << "  " << *msg.reason << "\n";
  if (msg.fact) out << "  " << msg.fact->text << "\n";
  out << "  " << msg.prompt << " [";
  for (std::size_t i = 0; i < msg.options.size(); ++i) out << (i ? " | " : "") << msg.options[i];
  out << "]\n";
  return out.str();
}

void to_json(Json& j, const TariffPreset& p) {
  j = Json{{"label", p.label}, {"tariff_eur_per_kwh", p.tariff_eur_per_kwh},
           {"emission_kg_per_kwh", p.emission_kg_per_kwh}};
}

void from_json(const Json& j, TariffPreset& p) {
  if (j.is_string()) {
    p = tariff_preset(j.get<std::string>());
    return;
  }
  p.label = j.value("label", std::string("custom"));
  p.tariff_eur_per_kwh = j.at("tariff_eur_per_kwh").get<double>();
  p.emission_kg_per_kwh = j.at("emission_kg_per_kwh").get<double>();
  if (!(p.tariff_eur_per_kwh > 0.0) || !(p.emission_kg_per_kwh > 0.0))
    throw ValidationError("tariff and emission factor must be > 0");
}

void to_json(Json& j, const ProjectionPolicy& p) {
  j = p.uniform ? Json("uniform") : Json(std::string(to_string(p.fixed)));
}

void from_json(const Json& j, ProjectionPolicy& p) {
  const auto name = j.get<std::string>();
  p = name == "uniform" ? ProjectionPolicy::uniform_random() : ProjectionPolicy::constant(parse_enum<Projection>(name));
}

void to_json(Json& j, const MessageTemplates& t) {
  j = Json{{"v", 1}, {"prompt", t.prompt}, {"options", t.options}};
  for (const auto& [k, v] : t.appliance_names) j["appliance_names"][std::string(to_string(k))] = v;
  for (const auto& [k, v] : t.reasons) j["reasons"][std::string(to_string(k))] = v;
  for (const auto& [type, by_proj] : t.facts)
    for (const auto& [proj, text] : by_proj) j["facts"][std::string(to_string(type))][std::string(to_string(proj))] = text;
}

void from_json(const Json& j, MessageTemplates& t) {
  t = MessageTemplates{};
  t.prompt = j.at("prompt").get<std::string>();
  t.options = j.at("options").get<std::vector<std::string>>();
  if (t.options.size() != 2) throw ValidationError("templates need exactly two response options");
  const Json names = j.value("appliance_names", Json::object());
  for (const auto& [k, v] : names.items())
    t.appliance_names[parse_enum<ApplianceKind>(k)] = v.get<std::string>();
  for (const auto& [k, v] : j.at("reasons").items()) t.reasons[parse_enum<ReasonKind>(k)] = v.get<std::string>();
  for (const auto reason : kAllReasons)
    if (!t.reasons.count(reason)) throw ValidationError("missing reason template " + std::string(to_string(reason)));
  for (const auto& [type, by_proj] : j.at("facts").items())
    for (const auto& [proj, text] : by_proj.items())
      t.facts[parse_enum<FactType>(type)][parse_enum<Projection>(proj)] = text.get<std::string>();
  for (const auto type : kAllFactTypes)
    for (const auto proj : kAllProjections)
      if (!t.facts[type].count(proj))
        throw ValidationError("missing fact template " + std::string(to_string(type)) + "/" +
                              std::string(to_string(proj)));
}

void to_json(Json& j, const RecommendationMessage& m) {
  j = Json{{"rec_id", m.rec_id},   {"mode", m.mode},     {"t", m.time},
           {"timestamp", m.timestamp}, {"prompt", m.prompt}, {"options", m.options}};
  if (m.context)
    j["context"] = {{"indoor_temp", m.context->indoor_temp},
                    {"outdoor_temp", m.context->outdoor_temp},
                    {"indoor_lux", m.context->indoor_lux},
                    {"outdoor_lux", m.context->outdoor_lux},
                    {"occupied", m.context->occupied}};
  if (m.reason) j["reason"] = *m.reason;
  if (m.fact)
    j["fact"] = {{"type", m.fact->type},   {"projection", m.fact->projection}, {"energy_kwh", m.fact->energy_kwh},
                 {"value", m.fact->value}, {"unit", m.fact->unit},             {"text", m.fact->text}};
}

void from_json(const Json& j, RecommendationMessage& m) {
  m = RecommendationMessage{};
  m.rec_id = j.at("rec_id").get<std::uint64_t>();
  m.mode = j.at("mode").get<ScenarioMode>();
  m.time = j.at("t").get<Timestamp>();
  m.timestamp = j.at("timestamp").get<std::string>();
  m.prompt = j.at("prompt").get<std::string>();
  m.options = j.at("options").get<std::vector<std::string>>();
  if (j.contains("context")) {
    const auto& c = j["context"];
    m.context = ContextBlock{c.at("indoor_temp").get<double>(), c.at("outdoor_temp").get<double>(),
                             c.at("indoor_lux").get<double>(), c.at("outdoor_lux").get<double>(),
                             c.at("occupied").get<bool>()};
  }
  if (j.contains("reason")) m.reason = j["reason"].get<std::string>();
  if (j.contains("fact")) {
    const auto& f = j["fact"];
    m.fact = FactSection{f.at("type").get<FactType>(),    f.at("projection").get<Projection>(),
                         f.at("energy_kwh").get<double>(), f.at("value").get<double>(),
                         f.at("unit").get<std::string>(), f.at("text").get<std::string>()};
  }
}

}  // namespace eerec
