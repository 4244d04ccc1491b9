#include "eerec/event.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "eerec/errors.hpp"

namespace eerec {

namespace {

MicroMomentKind parse_moment(const std::string& name) {
  for (auto k : {MicroMomentKind::UserExit, MicroMomentKind::UserEnter, MicroMomentKind::DeviceOnExtended,
                 MicroMomentKind::ContextFavorable})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown micro-moment '" + name + "'");
}

std::string_view to_string(ResetCause c) {
  return c == ResetCause::ConditionCleared ? "condition_cleared" : "re_enabled";
}

ResetCause parse_cause(const std::string& name) {
  if (name == "condition_cleared") return ResetCause::ConditionCleared;
  if (name == "re_enabled") return ResetCause::ReEnabled;
  throw ValidationError("unknown reset cause '" + name + "'");
}

struct PayloadWriter {
  Json& j;
  const SessionEvent& e;

  void operator()(const SessionStarted& p) const { j["setup"] = p.setup; }
  void operator()(const ReadingIngested& p) const {
    j["sensor"] = p.reading.sensor;
    j["kind"] = p.reading.kind;
    j["placement"] = p.reading.placement;
    j["value"] = p.reading.value;
  }
  void operator()(const MicroMomentDetected& p) const {
    j["moment"] = std::string(to_string(p.kind));
    if (p.appliance) j["appliance"] = *p.appliance;
    if (p.favorable) j["favorable"] = *p.favorable;
  }
  void operator()(const RecommendationIssued& p) const {
    j["rec"] = p.rec;
    j["message"] = p.message;
    j["draws"] = p.draws;
    j["rng_draws"] = p.rng_draws;
  }
  void operator()(const ResponseRecorded& p) const {
    j["rec_id"] = p.rec_id;
    j["response"] = p.response;
  }
  void operator()(const ActuationApplied& p) const {
    j["appliance"] = p.appliance;
    if (p.rec_id) j["rec_id"] = *p.rec_id;
    j["applied"] = p.applied;
    j["automatic"] = p.automatic;
    j["ack"] = p.ack;
  }
  void operator()(const ProfileUpdated& p) const {
    j["rec_id"] = p.rec_id;
    j["fact_type"] = p.fact;
    j["projection"] = p.projection;
    j["response"] = p.response;
    j["w_eco"] = p.w_eco;
    j["w_econ"] = p.w_econ;
  }
  void operator()(const ReissueReset& p) const {
    j["appliance"] = p.appliance;
    j["reason"] = p.reason;
    j["cause"] = std::string(to_string(p.cause));
  }
  void operator()(const SessionFinished&) const {}
};

}  // namespace

std::string_view event_type(const EventPayload& p) {
  struct Namer {
    std::string_view operator()(const SessionStarted&) const { return "session_started"; }
    std::string_view operator()(const ReadingIngested&) const { return "reading"; }
    std::string_view operator()(const MicroMomentDetected&) const { return "micro_moment"; }
    std::string_view operator()(const RecommendationIssued&) const { return "recommendation_issued"; }
    std::string_view operator()(const ResponseRecorded&) const { return "response"; }
    std::string_view operator()(const ActuationApplied&) const { return "actuation"; }
    std::string_view operator()(const ProfileUpdated&) const { return "profile_updated"; }
    std::string_view operator()(const ReissueReset&) const { return "reissue_reset"; }
    std::string_view operator()(const SessionFinished&) const { return "session_finished"; }
  };
  return std::visit(Namer{}, p);
}

void EventLog::append(SessionEvent e) {
  const auto expected = last_seq() + 1;
  if (e.seq != expected)
    throw OrderingError("event seq " + std::to_string(e.seq) + " does not follow " + std::to_string(last_seq()));
  if (auto t = last_time(); t && e.time < *t)
    throw OrderingError("event seq " + std::to_string(e.seq) + " goes back in time");
  events_.push_back(std::move(e));
}

std::span<const SessionEvent> EventLog::since(std::uint64_t after) const {
  // seq == index + 1
  const auto start = std::min<std::uint64_t>(after, events_.size());
  return std::span<const SessionEvent>(events_).subspan(start);
}

void to_json(Json& j, const SessionSetup& s) {
  j = Json{{"session_id", s.session_id},
           {"user", s.user},
           {"spec_id", s.spec_id},
           {"mode", s.mode},
           {"seed", s.seed},
           {"engine", s.engine},
           {"tariff", s.tariff},
           {"projection", s.projection},
           {"adapt", s.adapt},
           {"kb", s.kb},
           {"appliances", s.appliances}};
}

void from_json(const Json& j, SessionSetup& s) {
  s.session_id = j.value("session_id", std::string{});
  s.user = j.value("user", std::string{});
  s.spec_id = j.value("spec_id", std::string{});
  s.mode = j.at("mode").get<ScenarioMode>();
  s.seed = j.value("seed", std::uint64_t{0});
  s.engine = j.value("engine", EngineConfig{});
  s.tariff = j.value("tariff", paper_example_preset());
  s.projection = j.value("projection", ProjectionPolicy{});
  s.adapt = j.value("adapt", AdaptConfig{});
  s.kb = j.at("kb").get<KnowledgeBase>();
  s.appliances = j.at("appliances").get<std::vector<Appliance>>();
}

void to_json(Json& j, const SessionEvent& e) {
  j = Json{{"v", kLogSchemaVersion}, {"seq", e.seq}, {"t", e.time}, {"type", std::string(event_type(e.payload))}};
  std::visit(PayloadWriter{j, e}, e.payload);
}

void from_json(const Json& j, SessionEvent& e) {
  if (j.at("v").get<int>() != kLogSchemaVersion) throw ValidationError("unsupported log schema version");
  e.seq = j.at("seq").get<std::uint64_t>();
  e.time = j.at("t").get<Timestamp>();
  const auto type = j.at("type").get<std::string>();
  if (type == "session_started") {
    e.payload = SessionStarted{j.at("setup").get<SessionSetup>()};
  } else if (type == "reading") {
    SensorReading r{e.time, j.at("sensor").get<std::string>(), j.at("kind").get<SensorKind>(),
                    j.at("placement").get<Placement>(), j.at("value").get<double>()};
    e.payload = ReadingIngested{std::move(r)};
  } else if (type == "micro_moment") {
    MicroMomentDetected m;
    m.kind = parse_moment(j.at("moment").get<std::string>());
    if (j.contains("appliance")) m.appliance = j["appliance"].get<std::string>();
    if (j.contains("favorable")) m.favorable = j["favorable"].get<ReasonKind>();
    e.payload = std::move(m);
  } else if (type == "recommendation_issued") {
    e.payload = RecommendationIssued{j.at("rec").get<Recommendation>(), j.at("message").get<RecommendationMessage>(),
                                     j.at("draws").get<std::vector<double>>(), j.at("rng_draws").get<std::uint64_t>()};
  } else if (type == "response") {
    e.payload = ResponseRecorded{j.at("rec_id").get<std::uint64_t>(), j.at("response").get<Response>()};
  } else if (type == "actuation") {
    ActuationApplied a;
    a.appliance = j.at("appliance").get<std::string>();
    if (j.contains("rec_id")) a.rec_id = j["rec_id"].get<std::uint64_t>();
    a.applied = j.at("applied").get<bool>();
    a.automatic = j.value("automatic", false);
    a.ack = j.value("ack", std::string{});
    e.payload = std::move(a);
  } else if (type == "profile_updated") {
    e.payload = ProfileUpdated{j.at("rec_id").get<std::uint64_t>(), j.at("fact_type").get<FactType>(),
                               j.at("projection").get<Projection>(), j.at("response").get<Response>(),
                               j.at("w_eco").get<double>(),         j.at("w_econ").get<double>()};
  } else if (type == "reissue_reset") {
    e.payload = ReissueReset{j.at("appliance").get<std::string>(), j.at("reason").get<ReasonKind>(),
                             parse_cause(j.at("cause").get<std::string>())};
  } else if (type == "session_finished") {
    e.payload = SessionFinished{};
  } else {
    throw ValidationError("unknown event type '" + type + "'");
  }
}

std::string to_jsonl_line(const SessionEvent& e) { return Json(e).dump(); }

void write_log_jsonl(std::ostream& out, std::span<const SessionEvent> events) {
  for (const auto& e : events) out << to_jsonl_line(e) << '\n';
}

EventLog read_log_jsonl(std::istream& in) {
  EventLog log;
  for_each_json_line(in, [&](const Json& j, std::size_t line) {
    try {
      log.append(j.get<SessionEvent>());
    } catch (const OrderingError& e) {
      throw ParseError(e.what(), line);
    }
  });
  return log;
}

EventLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_log_jsonl(in);
}

}  // namespace eerec
