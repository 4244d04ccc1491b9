#include "eerec/engine.hpp"

#include "eerec/errors.hpp"

namespace eerec {

std::string_view to_string(ReissueStatus s) {
  switch (s) {
    case ReissueStatus::Active: return "active";
    case ReissueStatus::Pending: return "pending";
    case ReissueStatus::Paused: return "paused";
    case ReissueStatus::Ceased: return "ceased";
    case ReissueStatus::PermanentlyPaused: return "permanently_paused";
  }
  return "?";
}

ReissueEntry ReissueState::get(const ReissueKey& key) const {
  auto it = entries.find(key);
  return it == entries.end() ? ReissueEntry{} : it->second;
}

bool suppressed(const ReissueEntry& e, Timestamp now, const TimingConfig& timing) {
  switch (e.status) {
    case ReissueStatus::Pending:
    case ReissueStatus::Ceased:
    case ReissueStatus::PermanentlyPaused:
      return true;
    case ReissueStatus::Active:
    case ReissueStatus::Paused:
      break;
  }
  if (e.paused_until && now < *e.paused_until) return true;
  // Minimum spacing between two issues of the same key, whatever the response was.
  if (e.last_issued && now - *e.last_issued < timing.ignore_pause) return true;
  if (e.episode_start && now - *e.episode_start >= timing.episode_window) return true;
  return false;
}

std::optional<TriggerReason> rule_fires(ReasonKind rule, const Appliance& appliance, const ContextSnapshot& s,
                                        const OccupancyProfile& occupancy, const EngineConfig& cfg) {
  if (!appliance.on) return std::nullopt;
  const auto& th = cfg.thresholds;
  const bool away = s.absent_for >= th.absence;
  TriggerReason r;
  r.kind = rule;
  r.indoor_temp = s.indoor_temp;
  r.outdoor_temp = s.outdoor_temp;
  r.indoor_lux = s.indoor_lux;
  r.outdoor_lux = s.outdoor_lux;
  r.absent_for = s.absent_for;
  r.room_occupied = !away;

  switch (rule) {
    case ReasonKind::UserAway: {
      if (!cfg.rules.user_away || !away) return std::nullopt;
      r.p_occ_next = occupancy.at(s.time + Duration{kSlotSeconds});
      if (r.p_occ_next >= cfg.occupancy_cutoff) return std::nullopt;
      return r;
    }
    case ReasonKind::OutdoorCoolingAvailable:
      if (!cfg.rules.outdoor_cooling || away || appliance.kind != ApplianceKind::AirConditioner) return std::nullopt;
      if (!cooling_available(s, th)) return std::nullopt;
      return r;
    case ReasonKind::NaturalLightAvailable:
      if (!cfg.rules.natural_light || away || appliance.kind != ApplianceKind::Lights) return std::nullopt;
      if (!natural_light_available(s, th)) return std::nullopt;
      return r;
  }
  return std::nullopt;
}

std::vector<Recommendation> evaluate_triggers(const ContextSnapshot& snapshot, const KnowledgeBase& kb,
                                              const ReissueState& reissue, ScenarioMode mode,
                                              const EngineConfig& cfg) {
  std::vector<Recommendation> out;
  for (const auto& appliance : snapshot.appliances) {
    for (const ReasonKind rule : kAllReasons) {
      auto reason = rule_fires(rule, appliance, snapshot, kb.occupancy, cfg);
      if (!reason) continue;
      if (!suppressed(reissue.get({appliance.id, rule}), snapshot.time, cfg.timing)) {
        Recommendation rec;
        rec.created_at = snapshot.time;
        rec.appliance = appliance.id;
        rec.appliance_kind = appliance.kind;
        rec.reason = *reason;
        rec.mode = mode;
        rec.deadline = snapshot.time + cfg.timing.response_window;
        out.push_back(std::move(rec));
      }
      break;
    }
  }
  return out;
}

ReissueEntry note_issued(ReissueEntry e, Timestamp now) {
  if (!e.episode_start) e.episode_start = now;
  e.last_issued = now;
  e.status = ReissueStatus::Pending;
  return e;
}

ResponseOutcome record_response(const Recommendation& rec, Response response, Timestamp now,
                                const ReissueEntry& entry, const EngineConfig& cfg) {
  if (rec.lifecycle != Lifecycle::Pending) {
    if (rec.lifecycle == Lifecycle::Ignored && response != Response::None)
      throw ConflictError(ConflictError::Kind::WindowElapsed, "window elapsed");
    throw ConflictError(ConflictError::Kind::AlreadyResolved, "already resolved");
  }
  if (response != Response::None && now > rec.deadline)
    throw ConflictError(ConflictError::Kind::WindowElapsed, "window elapsed");
  if (response == Response::None && now < rec.deadline)
    throw ConflictError(ConflictError::Kind::NotYetDue, "response window still open");

  ResponseOutcome out{rec, entry, false};
  out.rec.resolved_at = now;
  auto& e = out.entry;
  auto pause = [&](Duration d) {
    e.paused_until = now + d;
    e.status = ReissueStatus::Paused;
    if (e.episode_start && *e.paused_until - *e.episode_start >= cfg.timing.episode_window)
      e.status = ReissueStatus::Ceased;
  };
  switch (response) {
    case Response::Accept:
      out.rec.lifecycle = Lifecycle::Accepted;
      out.actuate = true;
      ++e.accept_count;
      e.consecutive_rejects = 0;
      e.status = ReissueStatus::Active;
      e.episode_start.reset();
      break;
    case Response::Reject:
      out.rec.lifecycle = Lifecycle::Rejected;
      ++e.consecutive_rejects;
      pause(cfg.timing.reject_pause);
      break;
    case Response::None:
      out.rec.lifecycle = Lifecycle::Ignored;
      pause(cfg.timing.ignore_pause);
      break;
  }
  e = apply_profile_rules(e, cfg);
  return out;
}

ReissueEntry apply_profile_rules(ReissueEntry e, const EngineConfig& cfg) {
  if (e.accept_count >= cfg.n_auto) e.automation_candidate = true;
  if (e.consecutive_rejects >= cfg.n_perm) e.status = ReissueStatus::PermanentlyPaused;
  return e;
}

ReissueEntry close_episode(ReissueEntry e) {
  if (e.status == ReissueStatus::PermanentlyPaused || e.status == ReissueStatus::Pending) return e;
  e.status = ReissueStatus::Active;
  e.episode_start.reset();
  return e;
}

ReissueEntry re_enable(ReissueEntry e) {
  if (e.status != ReissueStatus::PermanentlyPaused) return e;
  e.status = ReissueStatus::Active;
  e.consecutive_rejects = 0;
  e.episode_start.reset();
  return e;
}

ActuationResult actuate(Appliance& appliance, Timestamp now) {
  if (!appliance.on) return {false, appliance.id + " was already off"};
  appliance.on = false;
  appliance.last_toggle = now;
  return {true, appliance.id + " has been turned off"};
}

void to_json(Json& j, const TimingConfig& t) {
  j = Json{{"response_window_s", t.response_window.count()},
           {"ignore_pause_s", t.ignore_pause.count()},
           {"reject_pause_s", t.reject_pause.count()},
           {"episode_window_s", t.episode_window.count()},
           {"evaluation_period_s", t.evaluation_period.count()}};
}

void from_json(const Json& j, TimingConfig& t) {
  t = TimingConfig{};
  t.response_window = seconds_field(j, "response_window_s", t.response_window);
  t.ignore_pause = seconds_field(j, "ignore_pause_s", t.ignore_pause);
  t.reject_pause = seconds_field(j, "reject_pause_s", t.reject_pause);
  t.episode_window = seconds_field(j, "episode_window_s", t.episode_window);
  t.evaluation_period = seconds_field(j, "evaluation_period_s", t.evaluation_period);
  if (t.response_window.count() <= 0 || t.evaluation_period.count() <= 0)
    throw ValidationError("timing constants must be positive");
  if (t.response_window >= t.evaluation_period)
    throw ValidationError("response window must be shorter than the evaluation period");
}

void to_json(Json& j, const EngineConfig& c) {
  j = Json{{"v", 1},
           {"thresholds", c.thresholds},
           {"occupancy_cutoff", c.occupancy_cutoff},
           {"n_auto", c.n_auto},
           {"n_perm", c.n_perm},
           {"rules",
            {{"user_away", c.rules.user_away},
             {"outdoor_cooling", c.rules.outdoor_cooling},
             {"natural_light", c.rules.natural_light}}},
           {"auto_execute", c.auto_execute},
           {"timing", c.timing}};
}

void from_json(const Json& j, EngineConfig& c) {
  if (j.value("v", 1) != 1) throw ValidationError("unsupported engine config version");
  c = EngineConfig{};
  c.thresholds = j.value("thresholds", c.thresholds);
  c.occupancy_cutoff = j.value("occupancy_cutoff", c.occupancy_cutoff);
  c.n_auto = j.value("n_auto", c.n_auto);
  c.n_perm = j.value("n_perm", c.n_perm);
  if (j.contains("rules")) {
    const auto& r = j["rules"];
    c.rules.user_away = r.value("user_away", true);
    c.rules.outdoor_cooling = r.value("outdoor_cooling", true);
    c.rules.natural_light = r.value("natural_light", true);
  }
  c.auto_execute = j.value("auto_execute", false);
  c.timing = j.value("timing", c.timing);
  if (c.n_auto < 1 || c.n_perm < 1) throw ValidationError("n_auto and n_perm must be >= 1");
}

void to_json(Json& j, const ReissueEntry& e) {
  j = Json{{"status", std::string(to_string(e.status))},
           {"consecutive_rejects", e.consecutive_rejects},
           {"accept_count", e.accept_count},
           {"automation_candidate", e.automation_candidate}};
  if (e.episode_start) j["episode_start"] = *e.episode_start;
  if (e.paused_until) j["paused_until"] = *e.paused_until;
  if (e.last_issued) j["last_issued"] = *e.last_issued;
}

void from_json(const Json& j, ReissueEntry& e) {
  static constexpr ReissueStatus all[] = {ReissueStatus::Active, ReissueStatus::Pending, ReissueStatus::Paused,
                                          ReissueStatus::Ceased, ReissueStatus::PermanentlyPaused};
  const auto name = j.at("status").get<std::string>();
  e = ReissueEntry{};
  bool known = false;
  for (auto s : all)
    if (to_string(s) == name) e.status = s, known = true;
  if (!known) throw ValidationError("unknown reissue status '" + name + "'");
  e.consecutive_rejects = j.value("consecutive_rejects", 0);
  e.accept_count = j.value("accept_count", 0);
  e.automation_candidate = j.value("automation_candidate", false);
  if (j.contains("episode_start")) e.episode_start = j["episode_start"].get<Timestamp>();
  if (j.contains("paused_until")) e.paused_until = j["paused_until"].get<Timestamp>();
  if (j.contains("last_issued")) e.last_issued = j["last_issued"].get<Timestamp>();
}

}  // namespace eerec
