#include "eerec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eerec/errors.hpp"
#include "embedded_data.hpp"

namespace eerec {

namespace {

constexpr Weekday kAllDays[] = {Weekday::Monday,   Weekday::Tuesday,  Weekday::Wednesday, Weekday::Thursday,
                                Weekday::Friday,   Weekday::Saturday, Weekday::Sunday};

Weekday parse_day(const std::string& name) {
  for (auto d : kAllDays)
    if (weekday_name(d) == name) return d;
  throw ValidationError("unknown weekday '" + name + "'");
}

double hour_of_day(Timestamp t) { return static_cast<double>(t.seconds_of_day()) / 3600.0; }

Appliance* find_appliance(std::vector<Appliance>& list, const ApplianceId& id) {
  for (auto& a : list)
    if (a.id == id) return &a;
  return nullptr;
}

double interpolate(const std::vector<double>& samples, double pos) {
  if (samples.empty()) return 0.0;
  if (pos <= 0.0) return samples.front();
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= samples.size()) return samples.back();
  const double f = pos - static_cast<double>(i);
  return samples[i] + (samples[i + 1] - samples[i]) * f;
}

}  // namespace

bool OccupancySchedule::at(Timestamp t) const {
  const auto day = t.day_of_week();
  if (std::find(days.begin(), days.end(), day) == days.end()) return false;
  const auto hour = static_cast<int>(t.seconds_of_day() / 3600);
  if (hour < start_hour || hour >= end_hour) return false;
  return present[static_cast<int>(day)][hour];
}

double WeatherProfile::outdoor_temp(Timestamp t) const {
  if (model == Model::Table) {
    auto it = temperature.find(t.day_of_week());
    if (it == temperature.end()) return temp_mean;
    return interpolate(it->second, (hour_of_day(t) - start_hour) * 60.0 / step_min);
  }
  return temp_mean + temp_amplitude * std::cos(2.0 * std::numbers::pi * (hour_of_day(t) - temp_peak_hour) / 24.0);
}

double WeatherProfile::outdoor_lux(Timestamp t) const {
  if (model == Model::Table) {
    auto it = luminosity.find(t.day_of_week());
    if (it == luminosity.end()) return 0.0;
    return std::max(0.0, interpolate(it->second, (hour_of_day(t) - start_hour) * 60.0 / step_min));
  }
  const double h = hour_of_day(t);
  if (h <= sunrise_hour || h >= sunset_hour) return 0.0;
  return lux_peak * std::sin(std::numbers::pi * (h - sunrise_hour) / (sunset_hour - sunrise_hour));
}

void ScenarioSpec::validate() const {
  const auto& o = occupancy;
  if (o.start_hour < 0 || o.end_hour > 24 || o.start_hour >= o.end_hour)
    throw ValidationError("occupancy schedule: invalid hours " + std::to_string(o.start_hour) + "-" +
                          std::to_string(o.end_hour));
  if (o.days.empty()) throw ValidationError("occupancy schedule has no days");
  if (appliances.empty()) throw ValidationError("scenario has no appliances");
  for (const auto& a : appliances)
    if (!(a.rated_kw > 0.0)) throw ValidationError("appliance '" + a.id + "': rated_kw must be > 0");
  if (weather.model == WeatherProfile::Model::Table) {
    if (weather.step_min < 1 || weather.step_min > 60) throw ValidationError("weather step_min must be in 1..60");
    if (weather.start_hour > o.start_hour) throw ValidationError("weather table starts after the schedule");
    const auto needed = static_cast<std::size_t>((o.end_hour - weather.start_hour) * 60 / weather.step_min + 1);
    for (auto day : o.days) {
      for (const auto* curve : {&weather.temperature, &weather.luminosity}) {
        const char* name = curve == &weather.temperature ? "temperature" : "luminosity";
        auto it = curve->find(day);
        if (it == curve->end())
          throw ValidationError(std::string("weather gap: no ") + name + " curve for " + weekday_name(day));
        if (it->second.size() < needed)
          throw ValidationError(std::string("weather gap: ") + name + " curve for " + weekday_name(day) + " ends at " +
                                std::to_string(weather.start_hour * 60 + (it->second.size() - 1) * weather.step_min) +
                                " min of the day");
      }
    }
  }
  if (weather.model == WeatherProfile::Model::Sinusoid && !(weather.sunset_hour > weather.sunrise_hour))
    throw ValidationError("weather: sunset must follow sunrise");
  if (dynamics.tau_ac.count() <= 0 || dynamics.tau_room.count() <= 0)
    throw ValidationError("dynamics time constants must be positive");
  if (behavior.retoggle_delay < Duration{60})
    throw ValidationError("retoggle_delay must be at least one simulated minute");
  if (behavior.motion_dropout < 0.0 || behavior.motion_dropout >= 1.0)
    throw ValidationError("motion_dropout must be in [0, 1)");
  if (history_weeks < 1) throw ValidationError("history_weeks must be >= 1");
}

ScenarioSpec office_week_spec() { return Json::parse(embedded::kOfficeWeekSpec).get<ScenarioSpec>(); }

double Persona::accept_probability(ScenarioMode mode, const std::optional<PersuasiveFact>& fact) const {
  const auto& by_fact = p_accept.at(mode);
  if (!fact) return by_fact.at(FactType::Econ).at(Projection::Actual);
  return by_fact.at(fact->type).at(fact->projection);
}

void Persona::validate(const TimingConfig& timing) const {
  auto check = [&](double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("persona '" + name + "': " + what + " must be in [0, 1]");
  };
  check(p_ignore, "p_ignore");
  for (auto mode : kAllModes) {
    if (!p_accept.contains(mode))
      throw ValidationError("persona '" + name + "': no p_accept for " + std::string(to_string(mode)));
    for (auto f : kAllFactTypes)
      for (auto pr : kAllProjections) check(p_accept.at(mode).at(f).at(pr), "p_accept");
  }
  if (latency_min.count() < 0 || latency_max < latency_min || latency_max >= timing.response_window)
    throw ValidationError("persona '" + name + "': latency must lie within the response window");
}

Persona Persona::constant(std::string name, double p, double p_ignore) {
  Persona out;
  out.name = std::move(name);
  out.p_ignore = p_ignore;
  for (auto mode : kAllModes)
    for (auto f : kAllFactTypes)
      for (auto pr : kAllProjections) out.p_accept[mode][f][pr] = p;
  return out;
}

PersonaDecision decide(const Persona& persona, const Recommendation& rec, Rng& rng) {
  const double u_ignore = rng.uniform();
  const double u_accept = rng.uniform();
  const auto latency = rng.uniform_int(persona.latency_min.count(), persona.latency_max.count());
  if (u_ignore < persona.p_ignore) return {Response::None, Duration{0}};
  const bool accept = u_accept < persona.accept_probability(rec.mode, rec.fact);
  return {accept ? Response::Accept : Response::Reject, Duration{latency}};
}

bool IndoorState::appliance_on(ApplianceKind kind) const {
  return std::any_of(appliances.begin(), appliances.end(), [&](const Appliance& a) { return a.kind == kind && a.on; });
}

IndoorState step_dynamics(IndoorState s, double outdoor_temp, double outdoor_lux, Duration dt,
                          const DynamicsConfig& cfg) {
  const bool ac = s.appliance_on(ApplianceKind::AirConditioner);
  const double target = ac ? cfg.setpoint : outdoor_temp;
  const double tau = static_cast<double>((ac ? cfg.tau_ac : cfg.tau_room).count());
  s.temp = target + (s.temp - target) * std::exp(-static_cast<double>(dt.count()) / tau);
  s.lux = cfg.window_factor * outdoor_lux + (s.appliance_on(ApplianceKind::Lights) ? cfg.lights_lux : 0.0);
  return s;
}

World::World(const ScenarioSpec& spec, std::uint64_t seed) : spec_(&spec), rng_(seed) {
  indoor_.temp = spec.initial_indoor_temp;
  indoor_.appliances = spec.appliances;
  for (auto& a : indoor_.appliances) a.on = false;
}

void World::switch_off(const ApplianceId& id, Timestamp t) {
  if (auto* a = find_appliance(indoor_.appliances, id); a && a->on) {
    a->on = false;
    a->last_toggle = t;
    remote_off_[id] = t;
  }
}

void World::user_behavior(Timestamp t) {
  const auto& b = spec_->behavior;
  const bool now_present = spec_->occupancy.at(t);
  const bool arriving = now_present && !present_;
  present_ = now_present;
  if (!present_) return;
  const double daylight = spec_->dynamics.window_factor * spec_->weather.outdoor_lux(t);
  for (auto& a : indoor_.appliances) {
    if (a.on) continue;
    // Arrival overrides the delay, except for appliances the engine just switched off.
    const bool remote = remote_off_.contains(a.id) && remote_off_.at(a.id) == a.last_toggle;
    const bool may_toggle = (arriving && !remote) || t - a.last_toggle >= b.retoggle_delay;
    bool want = false;
    switch (a.kind) {
      case ApplianceKind::Monitor: want = arriving && b.monitor_on_arrival; break;
      case ApplianceKind::Lights: want = may_toggle && daylight < b.lights_on_below_lux; break;
      case ApplianceKind::AirConditioner: want = may_toggle && indoor_.temp > b.ac_on_above_temp; break;
    }
    if (want) {
      a.on = true;
      a.last_toggle = t;
    }
  }
}

std::vector<SensorReading> World::step(Timestamp t) {
  const auto& o = spec_->occupancy;
  const Timestamp open = t.day_start() + Duration{o.start_hour * 3600};
  const Timestamp close = t.day_start() + Duration{o.end_hour * 3600};
  const bool new_day = !last_ || last_->day_start() != t.day_start();

  if (new_day) {
    indoor_.temp = spec_->initial_indoor_temp;
    for (auto& a : indoor_.appliances) {
      a.on = false;
      a.last_toggle = std::min(t, open);
    }
    present_ = false;
  } else {
    indoor_ = step_dynamics(indoor_, spec_->weather.outdoor_temp(*last_), spec_->weather.outdoor_lux(*last_),
                            t - *last_, spec_->dynamics);
  }
  last_ = t;

  if (t >= close) {
    present_ = false;
    for (auto& a : indoor_.appliances) {
      if (a.on) {
        a.on = false;
        a.last_toggle = t;
      }
    }
  } else {
    user_behavior(t);
  }
  const double out_temp = spec_->weather.outdoor_temp(t);
  const double out_lux = spec_->weather.outdoor_lux(t);
  indoor_ = step_dynamics(indoor_, out_temp, out_lux, Duration{0}, spec_->dynamics);

  const bool dropout = rng_.uniform() < spec_->behavior.motion_dropout;
  const double motion = present_ && !dropout ? 1.0 : 0.0;

  std::vector<SensorReading> out;
  out.reserve(5 + indoor_.appliances.size());
  out.push_back({t, "temp_out", SensorKind::Temperature, Placement::Outdoor, out_temp});
  out.push_back({t, "lux_out", SensorKind::Luminosity, Placement::Outdoor, out_lux});
  out.push_back({t, "temp_in", SensorKind::Temperature, Placement::Indoor, indoor_.temp});
  out.push_back({t, "lux_in", SensorKind::Luminosity, Placement::Indoor, indoor_.lux});
  out.push_back({t, "motion", SensorKind::Motion, Placement::Indoor, motion});
  for (const auto& a : indoor_.appliances)
    out.push_back({t, a.id, SensorKind::DevicePower, Placement::Indoor, a.on ? a.rated_kw : 0.0});
  return out;
}

std::vector<Timestamp> week_minutes(const OccupancySchedule& schedule, int week) {
  std::vector<Timestamp> out;
  auto days = schedule.days;
  std::sort(days.begin(), days.end());
  for (auto day : days) {
    const auto open = Timestamp::at(week, day, schedule.start_hour);
    const auto close = Timestamp::at(week, day, schedule.end_hour);
    for (auto t = open; t <= close; t += Duration{60}) out.push_back(t);
  }
  return out;
}

std::vector<SensorReading> generate_trace(const ScenarioSpec& spec, int first_week, int weeks,
                                          std::optional<std::uint64_t> seed) {
  spec.validate();
  World world(spec, seed.value_or(spec.seed));
  std::vector<SensorReading> out;
  for (int w = first_week; w < first_week + weeks; ++w)
    for (auto t : week_minutes(spec.occupancy, w)) {
      auto readings = world.step(t);
      out.insert(out.end(), readings.begin(), readings.end());
    }
  return out;
}

KnowledgeBase history_knowledge(const ScenarioSpec& spec, int week, std::uint64_t seed, const Thresholds& th) {
  const int first = week - spec.history_weeks;
  if (first < 0) throw ValidationError("week " + std::to_string(week) + " has no " +
                                       std::to_string(spec.history_weeks) + " weeks of history before it");
  const auto readings = generate_trace(spec, first, spec.history_weeks, seed);
  auto kb = build_knowledge(readings, spec.history_weeks, th);
  kb.generated_at = Timestamp::at(week, Weekday::Monday, 0);
  return kb;
}

SessionDriver::SessionDriver(ScenarioSpec spec, SessionSetup setup, int week, int days, Session::Observer observer)
    : spec_(std::move(spec)),
      world_(spec_, StreamSeeds::of(setup.seed).world),
      observer_(std::move(observer)) {
  spec_.validate();
  minutes_ = week_minutes(spec_.occupancy, week);
  if (days > 0) {
    auto sorted = spec_.occupancy.days;
    std::sort(sorted.begin(), sorted.end());
    if (static_cast<std::size_t>(days) < sorted.size()) {
      const auto stop = Timestamp::at(week, sorted[days], 0);
      minutes_.erase(std::lower_bound(minutes_.begin(), minutes_.end(), stop), minutes_.end());
    }
  }
  if (minutes_.empty()) throw ValidationError("scenario has no simulated minutes");
  start_ = minutes_.front();
  end_ = minutes_.back();
  now_ = start_;
  session_ = std::make_unique<Session>(Session::start(std::move(setup), start_, [this](const SessionEvent& e) {
    if (const auto* a = std::get_if<ActuationApplied>(&e.payload); a && a->applied) world_.switch_off(a->appliance, e.time);
    if (observer_) observer_(e);
  }));
}

SessionDriver::Status SessionDriver::status() const {
  if (session_->state().finished) return Status::Finished;
  if (session_->state().pending) return Status::AwaitingResponse;
  return Status::Running;
}

SessionDriver::Status SessionDriver::step() {
  if (session_->state().finished) return Status::Finished;
  if (session_->state().pending) return Status::AwaitingResponse;
  if (next_minute_ >= minutes_.size()) {
    finish();
    return Status::Finished;
  }
  const Timestamp t = minutes_[next_minute_++];
  now_ = std::max(now_, t);
  for (const auto& r : world_.step(t)) session_->ingest(r);
  session_->tick(t);
  return status();
}

SessionDriver::Status SessionDriver::advance(Timestamp until) {
  while (true) {
    const auto& st = session_->state();
    if (st.finished) return Status::Finished;
    if (const auto* rec = st.pending_recommendation()) {
      if (rec->deadline > until) {
        now_ = std::max(now_, until);
        return Status::AwaitingResponse;
      }
      now_ = std::max(now_, rec->deadline);
      session_->expire(now_);
      continue;
    }
    if (next_minute_ < minutes_.size() && minutes_[next_minute_] > until) {
      now_ = std::max(now_, until);
      return Status::Running;
    }
    step();
  }
}

Recommendation SessionDriver::respond(std::uint64_t rec_id, Response response, Timestamp now) {
  auto rec = session_->respond(rec_id, response, now);
  now_ = std::max(now_, now);
  return rec;
}

void SessionDriver::re_enable(const ApplianceId& appliance, ReasonKind reason, Timestamp now) {
  session_->re_enable(appliance, reason, std::max(now, now_));
}

void SessionDriver::finish() {
  if (!session_->state().finished) session_->finish(now_);
}

std::unique_ptr<SessionDriver> rebuild_driver(const ScenarioSpec& spec, const EventLog& log, int days,
                                              Session::Observer observer) {
  if (log.empty()) throw ValidationError("empty log");
  const auto* started = std::get_if<SessionStarted>(&log.events().front().payload);
  if (!started) throw ValidationError("log must begin with session_started");
  const int week = static_cast<int>(log.events().front().time.week());
  auto d = std::make_unique<SessionDriver>(spec, started->setup, week, days);
  for (const auto& e : log.events().subspan(1)) {
    if (const auto* r = std::get_if<ResponseRecorded>(&e.payload); r && r->response != Response::None) {
      d->advance(e.time);
      d->respond(r->rec_id, r->response, e.time);
    } else if (const auto* rr = std::get_if<ReissueReset>(&e.payload); rr && rr->cause == ResetCause::ReEnabled) {
      d->advance(e.time);
      d->re_enable(rr->appliance, rr->reason, e.time);
    } else if (std::holds_alternative<SessionFinished>(e.payload)) {
      d->advance(e.time);
      d->finish();
    }
  }
  if (!d->session().state().finished) d->advance(*log.last_time());
  const auto rebuilt = d->session().log().events();
  if (rebuilt.size() < log.size() || !std::equal(log.events().begin(), log.events().end(), rebuilt.begin()))
    throw ValidationError("log does not match a re-execution of its session");
  d->observer_ = std::move(observer);
  return d;
}

SessionSetup make_setup(const ScenarioSpec& spec, const RunOptions& opt) {
  SessionSetup s;
  s.user = opt.user;
  s.spec_id = spec.id;
  s.mode = opt.mode;
  s.seed = opt.seed;
  s.session_id = opt.user + "-" + std::string(to_string(opt.mode)) + "-" + std::to_string(opt.seed);
  s.engine = opt.engine;
  s.tariff = spec.tariff;
  s.projection = opt.projection;
  s.adapt = opt.adapt;
  const int week = opt.week > 0 ? opt.week : spec.history_weeks;
  s.kb = opt.kb ? *opt.kb : history_knowledge(spec, week, derive_seed(opt.seed, 3), opt.engine.thresholds);
  if (opt.profile) s.kb.profile = *opt.profile;
  s.appliances = spec.appliances;
  for (auto& a : s.appliances) a.on = false;
  return s;
}

EventLog run_session(const ScenarioSpec& spec, const Persona& persona, const RunOptions& opt) {
  persona.validate(opt.engine.timing);
  const int week = opt.week > 0 ? opt.week : spec.history_weeks;
  SessionDriver d(spec, make_setup(spec, opt), week, opt.days);
  Rng rng(StreamSeeds::of(opt.seed).persona);
  while (true) {
    const auto st = d.step();
    if (st == SessionDriver::Status::Finished) break;
    if (st != SessionDriver::Status::AwaitingResponse) continue;
    const Recommendation rec = *d.session().state().pending_recommendation();
    const auto decision = decide(persona, rec, rng);
    if (decision.response == Response::None)
      d.advance(rec.deadline);
    else
      d.respond(rec.id, decision.response, rec.created_at + decision.latency);
  }
  return d.session().log();
}

// --- JSON ---

void to_json(Json& j, const OccupancySchedule& s) {
  Json days = Json::object();
  for (auto d : s.days) {
    Json row = Json::array();
    for (int h = s.start_hour; h < s.end_hour; ++h) row.push_back(s.present[static_cast<int>(d)][h] ? 1 : 0);
    days[weekday_name(d)] = row;
  }
  j = Json{{"start_hour", s.start_hour}, {"end_hour", s.end_hour}, {"days", days}};
}

void from_json(const Json& j, OccupancySchedule& s) {
  s = OccupancySchedule{};
  s.start_hour = j.value("start_hour", 8);
  s.end_hour = j.value("end_hour", 22);
  if (s.start_hour < 0 || s.end_hour > 24 || s.start_hour >= s.end_hour)
    throw ValidationError("occupancy schedule: invalid hours");
  const auto cells = static_cast<std::size_t>(s.end_hour - s.start_hour);
  for (const auto& [name, row] : j.at("days").items()) {
    const auto day = parse_day(name);
    if (row.size() != cells)
      throw ValidationError("occupancy schedule gap: " + name + " has " + std::to_string(row.size()) + " of " +
                            std::to_string(cells) + " hourly cells");
    for (std::size_t i = 0; i < cells; ++i) {
      const int v = row[i].get<int>();
      if (v != 0 && v != 1) throw ValidationError("occupancy schedule: cells must be 0 or 1");
      s.present[static_cast<int>(day)][s.start_hour + static_cast<int>(i)] = v == 1;
    }
    s.days.push_back(day);
  }
  std::sort(s.days.begin(), s.days.end());
}

void to_json(Json& j, const WeatherProfile& w) {
  if (w.model == WeatherProfile::Model::Sinusoid) {
    j = Json{{"model", "sinusoid"},         {"temp_mean", w.temp_mean},       {"temp_amplitude", w.temp_amplitude},
             {"temp_peak_hour", w.temp_peak_hour}, {"lux_peak", w.lux_peak}, {"sunrise_hour", w.sunrise_hour},
             {"sunset_hour", w.sunset_hour}};
    return;
  }
  Json days = Json::object();
  for (const auto& [d, v] : w.temperature) days[weekday_name(d)]["temperature"] = v;
  for (const auto& [d, v] : w.luminosity) days[weekday_name(d)]["luminosity"] = v;
  j = Json{{"model", "table"}, {"step_min", w.step_min}, {"start_hour", w.start_hour}, {"days", days}};
}

void from_json(const Json& j, WeatherProfile& w) {
  w = WeatherProfile{};
  const auto model = j.value("model", std::string("sinusoid"));
  if (model == "sinusoid") {
    w.temp_mean = j.value("temp_mean", w.temp_mean);
    w.temp_amplitude = j.value("temp_amplitude", w.temp_amplitude);
    w.temp_peak_hour = j.value("temp_peak_hour", w.temp_peak_hour);
    w.lux_peak = j.value("lux_peak", w.lux_peak);
    w.sunrise_hour = j.value("sunrise_hour", w.sunrise_hour);
    w.sunset_hour = j.value("sunset_hour", w.sunset_hour);
  } else if (model == "table") {
    w.model = WeatherProfile::Model::Table;
    w.step_min = j.value("step_min", 60);
    w.start_hour = j.value("start_hour", 8);
    for (const auto& [name, curves] : j.at("days").items()) {
      const auto day = parse_day(name);
      if (curves.contains("temperature")) w.temperature[day] = curves["temperature"].get<std::vector<double>>();
      if (curves.contains("luminosity")) w.luminosity[day] = curves["luminosity"].get<std::vector<double>>();
    }
  } else {
    throw ValidationError("unknown weather model '" + model + "'");
  }
}

void to_json(Json& j, const DynamicsConfig& d) {
  j = Json{{"setpoint", d.setpoint},          {"tau_ac_s", d.tau_ac.count()},
           {"tau_room_s", d.tau_room.count()}, {"window_factor", d.window_factor},
           {"lights_lux", d.lights_lux}};
}

void from_json(const Json& j, DynamicsConfig& d) {
  d = DynamicsConfig{};
  d.setpoint = j.value("setpoint", d.setpoint);
  d.tau_ac = seconds_field(j, "tau_ac_s", d.tau_ac);
  d.tau_room = seconds_field(j, "tau_room_s", d.tau_room);
  d.window_factor = j.value("window_factor", d.window_factor);
  d.lights_lux = j.value("lights_lux", d.lights_lux);
}

void to_json(Json& j, const BehaviorConfig& b) {
  j = Json{{"lights_on_below_lux", b.lights_on_below_lux},
           {"ac_on_above_temp", b.ac_on_above_temp},
           {"monitor_on_arrival", b.monitor_on_arrival},
           {"retoggle_delay_s", b.retoggle_delay.count()},
           {"motion_dropout", b.motion_dropout}};
}

void from_json(const Json& j, BehaviorConfig& b) {
  b = BehaviorConfig{};
  b.lights_on_below_lux = j.value("lights_on_below_lux", b.lights_on_below_lux);
  b.ac_on_above_temp = j.value("ac_on_above_temp", b.ac_on_above_temp);
  b.monitor_on_arrival = j.value("monitor_on_arrival", b.monitor_on_arrival);
  b.retoggle_delay = seconds_field(j, "retoggle_delay_s", b.retoggle_delay);
  b.motion_dropout = j.value("motion_dropout", b.motion_dropout);
}

void to_json(Json& j, const ScenarioSpec& s) {
  j = Json{{"v", 1},
           {"id", s.id},
           {"occupancy", s.occupancy},
           {"weather", s.weather},
           {"appliances", s.appliances},
           {"initial_indoor_temp", s.initial_indoor_temp},
           {"dynamics", s.dynamics},
           {"behavior", s.behavior},
           {"tariff", s.tariff},
           {"seed", s.seed},
           {"history_weeks", s.history_weeks}};
}

void from_json(const Json& j, ScenarioSpec& s) {
  if (j.value("v", 1) != 1) throw ValidationError("unsupported scenario version");
  s = ScenarioSpec{};
  s.id = j.at("id").get<std::string>();
  s.occupancy = j.at("occupancy").get<OccupancySchedule>();
  s.weather = j.value("weather", WeatherProfile{});
  s.appliances = j.at("appliances").get<std::vector<Appliance>>();
  s.initial_indoor_temp = j.value("initial_indoor_temp", s.initial_indoor_temp);
  s.dynamics = j.value("dynamics", DynamicsConfig{});
  s.behavior = j.value("behavior", BehaviorConfig{});
  s.tariff = j.value("tariff", paper_example_preset());
  s.seed = j.value("seed", std::uint64_t{0});
  s.history_weeks = j.value("history_weeks", 3);
  s.validate();
}

void to_json(Json& j, const Persona& p) {
  Json accept = Json::object();
  for (const auto& [mode, by_fact] : p.p_accept) {
    if (mode == ScenarioMode::Plain) {
      accept[std::string(to_string(mode))] = by_fact.at(FactType::Econ).at(Projection::Actual);
      continue;
    }
    Json m = Json::object();
    for (const auto& [fact, by_proj] : by_fact)
      for (const auto& [proj, v] : by_proj) m[std::string(to_string(fact))][std::string(to_string(proj))] = v;
    accept[std::string(to_string(mode))] = m;
  }
  j = Json{{"name", p.name},
           {"p_ignore", p.p_ignore},
           {"latency_s", {p.latency_min.count(), p.latency_max.count()}},
           {"p_accept", accept}};
}

void from_json(const Json& j, Persona& p) {
  p = Persona{};
  p.name = j.value("name", std::string("persona"));
  p.p_ignore = j.value("p_ignore", 0.0);
  if (j.contains("latency_s")) {
    const auto& l = j["latency_s"];
    p.latency_min = Duration{l.at(0).get<std::int64_t>()};
    p.latency_max = Duration{l.at(1).get<std::int64_t>()};
  }
  // Each level may be a number standing for all cells beneath it.
  const auto& accept = j.at("p_accept");
  for (auto mode : kAllModes) {
    const auto key = std::string(to_string(mode));
    if (!accept.contains(key)) throw ValidationError("persona '" + p.name + "': no p_accept for " + key);
    const auto& m = accept[key];
    for (auto fact : kAllFactTypes) {
      const Json* f = m.is_number() ? &m : (m.contains(std::string(to_string(fact))) ? &m[std::string(to_string(fact))] : nullptr);
      if (!f) throw ValidationError("persona '" + p.name + "': no p_accept for " + key + "/" + std::string(to_string(fact)));
      for (auto proj : kAllProjections) {
        const Json* v = f->is_number() ? f : (f->contains(std::string(to_string(proj))) ? &(*f)[std::string(to_string(proj))] : nullptr);
        if (!v) throw ValidationError("persona '" + p.name + "': missing p_accept cell");
        p.p_accept[mode][fact][proj] = v->get<double>();
      }
    }
  }
  p.validate();
}

void to_json(Json& j, const RunOptions& o) {
  j = Json{{"mode", o.mode},   {"seed", o.seed}, {"user", o.user},   {"engine", o.engine},
           {"projection", o.projection}, {"adapt", o.adapt}, {"week", o.week}, {"days", o.days}};
  if (o.kb) j["kb"] = *o.kb;
  if (o.profile) j["profile"] = *o.profile;
}

void from_json(const Json& j, RunOptions& o) {
  o = RunOptions{};
  o.mode = j.value("mode", o.mode);
  o.seed = j.value("seed", o.seed);
  o.user = j.value("user", o.user);
  if (j.contains("engine")) o.engine = j.at("engine").get<EngineConfig>();
  if (j.contains("projection")) o.projection = j.at("projection").get<ProjectionPolicy>();
  if (j.contains("adapt")) o.adapt = j.at("adapt").get<AdaptConfig>();
  o.week = j.value("week", 0);
  o.days = j.value("days", 0);
  if (o.week < 0 || o.days < 0) throw ValidationError("week and days must be >= 0");
  if (j.contains("kb")) o.kb = j.at("kb").get<KnowledgeBase>();
  if (j.contains("profile")) o.profile = j.at("profile").get<PersuasionProfile>();
}

}  // namespace eerec
