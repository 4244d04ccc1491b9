#include "eerec/session.hpp"

#include <cstdio>

#include "eerec/errors.hpp"

namespace eerec {

namespace {

ReissueKey key_of(const Recommendation& r) { return {r.appliance, r.reason.kind}; }

void check_setup(const SessionSetup& s) {
  if (s.appliances.empty()) throw ValidationError("session needs at least one appliance");
  for (std::size_t i = 0; i < s.appliances.size(); ++i) {
    if (!(s.appliances[i].rated_kw > 0.0))
      throw ValidationError("appliance '" + s.appliances[i].id + "': rated_kw must be > 0");
    for (std::size_t k = 0; k < i; ++k)
      if (s.appliances[k].id == s.appliances[i].id)
        throw ValidationError("duplicate appliance id '" + s.appliances[i].id + "'");
  }
  if (!(s.tariff.tariff_eur_per_kwh > 0.0) || !(s.tariff.emission_kg_per_kwh > 0.0))
    throw ValidationError("tariff and emission factor must be > 0");
}

}  // namespace

const Recommendation* SessionState::pending_recommendation() const {
  if (!pending) return nullptr;
  auto it = recommendations.find(*pending);
  return it == recommendations.end() ? nullptr : &it->second;
}

void SessionState::apply(const SessionEvent& e) {
  if (e.seq != last_seq + 1) throw ValidationError("event seq " + std::to_string(e.seq) + " out of order");
  if (last_time && e.time < *last_time) throw ValidationError("event time goes backwards");
  if (finished) throw ValidationError("event after session end");
  const bool is_start = std::holds_alternative<SessionStarted>(e.payload);
  if (setup.has_value() == is_start)
    throw ValidationError(is_start ? "session started twice" : "log must begin with session_started");

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SessionStarted>) {
          setup = p.setup;
          tracker = ContextTracker(p.setup.appliances);
          profile = p.setup.kb.profile;
        } else if constexpr (std::is_same_v<T, ReadingIngested>) {
          tracker.ingest(p.reading);
        } else if constexpr (std::is_same_v<T, MicroMomentDetected>) {
          ++micro_moments;
        } else if constexpr (std::is_same_v<T, RecommendationIssued>) {
          if (pending) throw ValidationError("recommendation issued while another is pending");
          if (p.rec.id != next_rec_id) throw ValidationError("unexpected recommendation id");
          recommendations[p.rec.id] = p.rec;
          pending = p.rec.id;
          next_rec_id = p.rec.id + 1;
          rng_draws = p.rng_draws;
          auto& entry = reissue.entries[key_of(p.rec)];
          entry = note_issued(entry, e.time);
        } else if constexpr (std::is_same_v<T, ResponseRecorded>) {
          auto it = recommendations.find(p.rec_id);
          if (it == recommendations.end()) throw ValidationError("response to unknown recommendation");
          const auto key = key_of(it->second);
          auto out = record_response(it->second, p.response, e.time, reissue.get(key), setup->engine);
          it->second = out.rec;
          reissue.entries[key] = out.entry;
          if (pending == p.rec_id) pending.reset();
        } else if constexpr (std::is_same_v<T, ActuationApplied>) {
          if (p.applied) tracker.switch_off(p.appliance, e.time);
        } else if constexpr (std::is_same_v<T, ProfileUpdated>) {
          profile = update_profile(profile, p.fact, p.projection, p.rec_id, p.response, setup->adapt);
          if (profile.w_eco != p.w_eco || profile.w_econ != p.w_econ)
            throw ValidationError("profile weights disagree with the logged update");
        } else if constexpr (std::is_same_v<T, ReissueReset>) {
          auto& entry = reissue.entries[{p.appliance, p.reason}];
          entry = p.cause == ResetCause::ConditionCleared ? close_episode(entry) : eerec::re_enable(entry);
        } else if constexpr (std::is_same_v<T, SessionFinished>) {
          if (pending) {
            auto& rec = recommendations.at(*pending);
            rec.lifecycle = Lifecycle::Ceased;
            rec.resolved_at = e.time;
            auto& entry = reissue.entries[key_of(rec)];
            if (entry.status == ReissueStatus::Pending) entry.status = ReissueStatus::Active;
            pending.reset();
          }
          finished = true;
        }
      },
      e.payload);
  last_seq = e.seq;
  last_time = e.time;
}

Json state_json(const SessionState& s) {
  Json reissue = Json::array();
  for (const auto& [key, entry] : s.reissue.entries)
    reissue.push_back(Json{{"appliance", key.first}, {"reason", key.second}, {"entry", entry}});
  Json recs = Json::array();
  for (const auto& [id, rec] : s.recommendations) recs.push_back(rec);
  return Json{{"setup", s.setup ? Json(*s.setup) : Json(nullptr)},
              {"tracker", s.tracker},
              {"reissue", reissue},
              {"recommendations", recs},
              {"pending", s.pending ? Json(*s.pending) : Json(nullptr)},
              {"profile", s.profile},
              {"next_rec_id", s.next_rec_id},
              {"rng_draws", s.rng_draws},
              {"last_seq", s.last_seq},
              {"last_time", s.last_time ? Json(*s.last_time) : Json(nullptr)},
              {"micro_moments", s.micro_moments},
              {"finished", s.finished}};
}

std::uint64_t state_hash(const SessionState& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : state_json(s).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SessionState replay(std::span<const SessionEvent> events) {
  SessionState s;
  for (const auto& e : events) s.apply(e);
  return s;
}

Session Session::start(SessionSetup setup, Timestamp t0, Observer observer) {
  check_setup(setup);
  Session s;
  s.observer_ = std::move(observer);
  s.rng_ = Rng(engine_stream_seed(setup.seed));
  s.emit(t0, SessionStarted{std::move(setup)});
  return s;
}

Session Session::resume(const EventLog& log, Observer observer) {
  Session s;
  s.state_ = replay(log.events());
  if (!s.state_.setup) throw ValidationError("empty log");
  s.log_ = log;
  s.observer_ = std::move(observer);
  s.rng_ = Rng(engine_stream_seed(s.state_.setup->seed));
  s.rng_.skip(s.state_.rng_draws);
  s.previous_ = s.snapshot(*s.state_.last_time);
  return s;
}

void Session::emit(Timestamp t, EventPayload payload) {
  SessionEvent e{state_.last_seq + 1, t, std::move(payload)};
  state_.apply(e);
  log_.append(std::move(e));
  if (observer_) observer_(log_.events().back());
}

Timestamp Session::at_least_last(Timestamp t) const {
  return state_.last_time && t < *state_.last_time ? *state_.last_time : t;
}

std::optional<ContextSnapshot> Session::snapshot(Timestamp now) const {
  return state_.tracker.snapshot(now, setup().engine.thresholds.absence);
}

void Session::ingest(const SensorReading& r) {
  if (!in_range(r)) throw ValidationError("reading from '" + r.sensor + "' out of range");
  emit(r.time, ReadingIngested{r});
}

std::optional<Recommendation> Session::tick(Timestamp now) {
  if (state_.finished) return std::nullopt;
  const auto& cfg = setup().engine;
  const auto& kb = setup().kb;
  auto snap = snapshot(now);
  if (!snap) {
    previous_.reset();
    return std::nullopt;
  }

  for (const auto& m : detect_micro_moments(snap, previous_, cfg.thresholds))
    emit(now, MicroMomentDetected{m.kind, m.appliance, m.favorable});

  // An episode ends as soon as its originating rule stops holding.
  std::vector<ReissueKey> cleared;
  for (const auto& [key, entry] : state_.reissue.entries) {
    if (!entry.episode_start || entry.status == ReissueStatus::Pending ||
        entry.status == ReissueStatus::PermanentlyPaused)
      continue;
    const auto* appliance = snap->find(key.first);
    if (!appliance || !rule_fires(key.second, *appliance, *snap, kb.occupancy, cfg)) cleared.push_back(key);
  }
  for (const auto& key : cleared) emit(now, ReissueReset{key.first, key.second, ResetCause::ConditionCleared});

  if (cfg.auto_execute) {
    bool acted = false;
    for (const auto& cand : evaluate_triggers(*snap, kb, state_.reissue, setup().mode, cfg)) {
      if (!state_.reissue.get(key_of(cand)).automation_candidate) continue;
      Appliance copy = *snap->find(cand.appliance);
      const auto res = actuate(copy, now);
      emit(now, ActuationApplied{cand.appliance, std::nullopt, res.applied, true, res.ack});
      acted = true;
    }
    if (acted) snap = snapshot(now);
  }

  std::optional<Recommendation> issued;
  if (!state_.pending) {
    auto candidates = evaluate_triggers(*snap, kb, state_.reissue, setup().mode, cfg);
    if (!candidates.empty()) {
      Recommendation rec = std::move(candidates.front());
      rec.id = state_.next_rec_id;
      std::vector<double> draws;
      std::optional<PersuasiveFact> fact;
      if (rec.mode != ScenarioMode::Plain) {
        const double u_type = rng_.uniform();
        draws.push_back(u_type);
        const FactType type = select_fact_type(state_.profile, u_type);
        Projection projection = setup().projection.fixed;
        if (setup().projection.uniform) {
          const double u_proj = rng_.uniform();
          draws.push_back(u_proj);
          projection = select_projection(setup().projection, u_proj);
        }
        const Appliance& appliance = *snap->find(rec.appliance);
        fact = compute_savings(appliance, appliance.last_toggle, now, setup().tariff.tariff_eur_per_kwh,
                               setup().tariff.emission_kg_per_kwh, kb.habits.weekly_on_hours(rec.appliance), type,
                               projection);
      }
      rec.fact = fact;
      auto message = compose_message(rec, *snap, fact, rec.mode);
      emit(now, RecommendationIssued{rec, std::move(message), std::move(draws), rng_.draws()});
      issued = std::move(rec);
    }
  }
  previous_ = snapshot(now);
  return issued;
}

bool Session::expire(Timestamp now) {
  const auto* rec = state_.pending_recommendation();
  if (!rec || now < rec->deadline) return false;
  respond(rec->id, Response::None, now);
  return true;
}

Recommendation Session::respond(std::uint64_t rec_id, Response response, Timestamp now) {
  if (state_.finished) throw ConflictError(ConflictError::Kind::AlreadyResolved, "session finished");
  auto it = state_.recommendations.find(rec_id);
  if (it == state_.recommendations.end())
    throw NotFoundError("recommendation " + std::to_string(rec_id) + " not found");
  const Recommendation rec = it->second;
  const auto outcome = record_response(rec, response, now, state_.reissue.get(key_of(rec)), setup().engine);

  emit(now, ResponseRecorded{rec_id, response});
  if (outcome.actuate) {
    Appliance copy;
    for (const auto& a : state_.tracker.appliances())
      if (a.id == rec.appliance) copy = a;
    const auto res = actuate(copy, now);
    emit(now, ActuationApplied{rec.appliance, rec_id, res.applied, false, res.ack});
  }
  if (rec.fact) {
    const auto next = update_profile(state_.profile, rec.fact->type, rec.fact->projection, rec_id, response,
                                     setup().adapt);
    emit(now, ProfileUpdated{rec_id, rec.fact->type, rec.fact->projection, response, next.w_eco, next.w_econ});
  }
  return state_.recommendations.at(rec_id);
}

void Session::re_enable(const ApplianceId& appliance, ReasonKind reason, Timestamp now) {
  const auto entry = state_.reissue.get({appliance, reason});
  if (entry.status != ReissueStatus::PermanentlyPaused) return;
  emit(at_least_last(now), ReissueReset{appliance, reason, ResetCause::ReEnabled});
}

void Session::finish(Timestamp now) {
  if (state_.finished) return;
  now = at_least_last(now);
  expire(now);
  emit(now, SessionFinished{});
}

}  // namespace eerec
