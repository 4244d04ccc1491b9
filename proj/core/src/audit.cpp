#include "eerec/audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace eerec {

namespace {

namespace rule = audit_rule;

bool close_enough(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) + 1e-12;
}

std::string secs(Duration d) { return std::to_string(d.count()) + " s"; }

// Room context as seen by the auditor, rebuilt from raw readings.
struct Room {
  struct Device {
    ApplianceKind kind = ApplianceKind::Monitor;
    double rated_kw = 0.0;
    bool on = false;
    Timestamp on_since;
    int period = 0;
    double power = 0.0;
    Timestamp power_since;
    bool expect_off = false;
  };

  std::map<std::pair<SensorKind, Placement>, double> env;
  std::optional<Timestamp> first_motion;
  std::optional<Timestamp> last_presence;
  bool moving = false;
  std::map<ApplianceId, Device> devices;
  double metered_kwh = 0.0;

  bool complete() const {
    for (auto k : {SensorKind::Temperature, SensorKind::Luminosity})
      for (auto p : {Placement::Indoor, Placement::Outdoor})
        if (!env.contains({k, p})) return false;
    return first_motion.has_value();
  }
  double value(SensorKind k, Placement p) const { return env.at({k, p}); }

  Duration absent_for(Timestamp now) const {
    if (moving) return Duration{0};
    const Timestamp since = last_presence ? *last_presence : *first_motion;
    return std::max(Duration{0}, now - since);
  }

  void meter(Device& d, Timestamp t) {
    metered_kwh += d.power * hours(t - d.power_since);
    d.power_since = t;
  }
};

struct KeyTrack {
  std::optional<Timestamp> last_issue;
  std::optional<Timestamp> episode_first;
  std::optional<Timestamp> last_ignore;
  std::optional<Timestamp> last_reject;
  int consecutive_rejects = 0;
  bool permanently_paused = false;
};

class Auditor {
 public:
  explicit Auditor(const AuditOptions& opt) : opt_(opt) {}

  AuditReport run(std::span<const SessionEvent> events) {
    report_.events = events.size();
    if (events.empty()) {
      fail(rule::kStructure, 0, Timestamp{}, "empty log");
      return report_;
    }
    for (const auto& e : events) {
      check_order(e);
      if (awaiting_actuation_ && !std::holds_alternative<ActuationApplied>(e.payload)) {
        fail(rule::kActuation, e.seq, e.time,
             "accepted recommendation " + std::to_string(*awaiting_actuation_) + " was not actuated");
        awaiting_actuation_.reset();
      }
      if (finished_) fail(rule::kStructure, e.seq, e.time, "event after session_finished");
      std::visit([&](const auto& p) { on(e, p); }, e.payload);
      last_seq_ = e.seq;
      last_time_ = e.time;
    }
    if (awaiting_actuation_)
      fail(rule::kActuation, last_seq_, last_time_, "log ends before the accepted recommendation was actuated");
    close_energy();
    return report_;
  }

 private:
  void fail(const char* name, std::uint64_t seq, Timestamp t, std::string detail) {
    report_.violations.push_back({name, seq, t, std::move(detail)});
  }

  void check_order(const SessionEvent& e) {
    if (e.seq != last_seq_ + 1)
      fail(rule::kOrdering, e.seq, e.time, "seq " + std::to_string(e.seq) + " after " + std::to_string(last_seq_));
    if (last_seq_ > 0 && e.time < last_time_) fail(rule::kOrdering, e.seq, e.time, "time goes backwards");
  }

  bool started(const SessionEvent& e) {
    if (setup_) return true;
    fail(rule::kStructure, e.seq, e.time, "log does not begin with session_started");
    return false;
  }

  // --- rule predicates on the auditor's own context ---

  bool away(Timestamp t) const { return room_.absent_for(t) >= setup_->engine.thresholds.absence; }

  double next_slot_occupancy(Timestamp t) const {
    const Timestamp next = t + Duration{kSlotSeconds};
    return setup_->kb.occupancy.p[static_cast<int>(next.day_of_week())][slot_of(next)];
  }

  bool holds(ReasonKind reason, const Room::Device& d, Timestamp t) const {
    const auto& cfg = setup_->engine;
    const auto& th = cfg.thresholds;
    if (!room_.complete() || !d.on) return false;
    switch (reason) {
      case ReasonKind::UserAway:
        return cfg.rules.user_away && away(t) && next_slot_occupancy(t) < cfg.occupancy_cutoff;
      case ReasonKind::OutdoorCoolingAvailable:
        return cfg.rules.outdoor_cooling && !away(t) && d.kind == ApplianceKind::AirConditioner &&
               room_.value(SensorKind::Temperature, Placement::Outdoor) <=
                   room_.value(SensorKind::Temperature, Placement::Indoor) - th.delta_t;
      case ReasonKind::NaturalLightAvailable:
        return cfg.rules.natural_light && !away(t) && d.kind == ApplianceKind::Lights &&
               room_.value(SensorKind::Luminosity, Placement::Outdoor) >= th.natural_light_lux;
    }
    return false;
  }

  // --- events ---

  void on(const SessionEvent& e, const SessionStarted& p) {
    if (setup_) {
      fail(rule::kStructure, e.seq, e.time, "second session_started");
      return;
    }
    if (e.seq != 1) fail(rule::kStructure, e.seq, e.time, "session_started is not the first event");
    setup_ = p.setup;
    for (const auto& a : p.setup.appliances) {
      Room::Device d;
      d.kind = a.kind;
      d.rated_kw = a.rated_kw;
      d.on = a.on;
      d.on_since = a.last_toggle;
      d.power = a.on ? a.rated_kw : 0.0;
      d.power_since = e.time;
      room_.devices[a.id] = d;
    }
    w_eco_ = p.setup.kb.profile.w_eco;
    w_econ_ = p.setup.kb.profile.w_econ;
  }

  void on(const SessionEvent& e, const ReadingIngested& p) {
    if (!started(e)) return;
    const auto& r = p.reading;
    if (r.time != e.time) fail(rule::kStructure, e.seq, e.time, "reading time differs from event time");
    switch (r.kind) {
      case SensorKind::Motion:
        if (!room_.first_motion) room_.first_motion = r.time;
        if (r.value != 0.0) {
          room_.moving = true;
          room_.last_presence = r.time;
        } else if (!(room_.last_presence == r.time)) {
          room_.moving = false;
        }
        break;
      case SensorKind::DevicePower: {
        auto it = room_.devices.find(r.sensor);
        if (it == room_.devices.end()) break;
        auto& d = it->second;
        room_.meter(d, r.time);
        d.power = r.value;
        const bool on = r.value > 0.0;
        if (d.expect_off) {
          if (on) fail(rule::kActuation, e.seq, e.time, r.sensor + " still draws power after an accepted turn-off");
          d.expect_off = false;
        }
        if (on && !d.on) {
          d.on_since = r.time;
          ++d.period;
        }
        d.on = on;
        break;
      }
      default:
        room_.env[{r.kind, r.placement}] = r.value;
    }
  }

  void on(const SessionEvent&, const MicroMomentDetected&) {}

  void on(const SessionEvent& e, const RecommendationIssued& p) {
    if (!started(e)) return;
    ++report_.recommendations;
    const auto& rec = p.rec;
    const auto& cfg = setup_->engine;
    const auto t = e.time;

    if (rec.created_at != t) fail(rule::kStructure, e.seq, t, "created_at differs from event time");
    if (pending_) fail(rule::kSinglePending, e.seq, t, "issued while recommendation " + std::to_string(*pending_) + " is pending");
    if (rec.id != next_id_) fail(rule::kStructure, e.seq, t, "unexpected recommendation id " + std::to_string(rec.id));
    next_id_ = rec.id + 1;
    if (rec.deadline != t + cfg.timing.response_window)
      fail(rule::kResponseWindow, e.seq, t, "deadline is not created_at + " + secs(cfg.timing.response_window));

    auto dev_it = room_.devices.find(rec.appliance);
    if (dev_it == room_.devices.end()) {
      fail(rule::kStructure, e.seq, t, "unknown appliance " + rec.appliance);
      return;
    }
    const auto& dev = dev_it->second;

    // Conditions, re-checked from the auditor's own context.
    if (!room_.complete()) {
      fail(rule::kConditions, e.seq, t, "issued before the context was complete");
    } else {
      if (!holds(rec.reason.kind, dev, t))
        fail(rule::kConditions, e.seq, t,
             std::string(to_string(rec.reason.kind)) + " does not hold for " + rec.appliance);
      for (auto r : kAllReasons) {
        if (r == rec.reason.kind) break;
        if (holds(r, dev, t))
          fail(rule::kRulePriority, e.seq, t, std::string(to_string(r)) + " takes precedence for " + rec.appliance);
      }
      const auto& rs = rec.reason;
      if (rs.indoor_temp != room_.value(SensorKind::Temperature, Placement::Indoor) ||
          rs.outdoor_temp != room_.value(SensorKind::Temperature, Placement::Outdoor) ||
          rs.indoor_lux != room_.value(SensorKind::Luminosity, Placement::Indoor) ||
          rs.outdoor_lux != room_.value(SensorKind::Luminosity, Placement::Outdoor) ||
          rs.absent_for != room_.absent_for(t))
        fail(rule::kConditions, e.seq, t, "logged trigger context differs from the readings");
    }

    // Re-issue timing for this (appliance, reason).
    auto& k = keys_[{rec.appliance, rec.reason.kind}];
    const auto& tm = cfg.timing;
    if (k.last_issue && t - *k.last_issue < tm.ignore_pause)
      fail(rule::kMinSpacing, e.seq, t, "re-issued " + secs(t - *k.last_issue) + " after the previous issue");
    if (k.last_ignore && t - *k.last_ignore < tm.ignore_pause)
      fail(rule::kIgnoreCooldown, e.seq, t, "re-issued " + secs(t - *k.last_ignore) + " after an ignore");
    if (k.last_reject && t - *k.last_reject < tm.reject_pause)
      fail(rule::kRejectCooldown, e.seq, t, "re-issued " + secs(t - *k.last_reject) + " after a reject");
    if (k.permanently_paused) fail(rule::kPermanentPause, e.seq, t, "issued while permanently paused");
    if (!k.episode_first) {
      k.episode_first = t;
    } else if (t - *k.episode_first >= tm.episode_window) {
      fail(rule::kEpisodeCease, e.seq, t, "issued " + secs(t - *k.episode_first) + " into its episode");
    }
    k.last_issue = t;

    check_message(e, p);
    check_fact(e, p, dev);

    pending_ = rec.id;
    recs_[rec.id] = rec;
  }

  void check_message(const SessionEvent& e, const RecommendationIssued& p) {
    const auto& m = p.message;
    const auto mode = setup_->mode;
    if (p.rec.mode != mode || m.mode != mode)
      fail(rule::kModeFidelity, e.seq, e.time, "recommendation mode differs from the session mode");
    if (m.rec_id != p.rec.id) fail(rule::kStructure, e.seq, e.time, "message carries another recommendation id");
    if (m.prompt.empty() || m.timestamp.empty() || m.options.size() != 2)
      fail(rule::kModeFidelity, e.seq, e.time, "prompt, timestamp or options missing");
    const bool want_fact = mode != ScenarioMode::Plain;
    const bool want_explanation = mode == ScenarioMode::Explainable;
    if (m.fact.has_value() != want_fact || p.rec.fact.has_value() != want_fact)
      fail(rule::kModeFidelity, e.seq, e.time, std::string("fact section not allowed/required in ") + std::string(to_string(mode)));
    if (m.context.has_value() != want_explanation || m.reason.has_value() != want_explanation)
      fail(rule::kModeFidelity, e.seq, e.time,
           std::string("context/reason sections not allowed/required in ") + std::string(to_string(mode)));
  }

  void check_fact(const SessionEvent& e, const RecommendationIssued& p, const Room::Device& dev) {
    const auto& rec = p.rec;
    const double tol = opt_.relative_tolerance;
    const std::size_t expected_draws =
        rec.mode == ScenarioMode::Plain ? 0 : (setup_->projection.uniform ? 2 : 1);
    if (p.draws.size() != expected_draws) fail(rule::kFactSelection, e.seq, e.time, "unexpected number of draws");
    rng_draws_ += p.draws.size();
    if (p.rng_draws != rng_draws_) fail(rule::kFactSelection, e.seq, e.time, "random stream position disagrees");
    if (!rec.fact || p.draws.size() != expected_draws || expected_draws == 0) return;
    const auto& f = *rec.fact;

    const FactType type = p.draws[0] < w_eco_ / (w_eco_ + w_econ_) ? FactType::Eco : FactType::Econ;
    if (f.type != type) fail(rule::kFactSelection, e.seq, e.time, "fact type does not follow its draw");
    Projection requested = setup_->projection.fixed;
    if (setup_->projection.uniform) {
      const int i = std::min(2, static_cast<int>(p.draws[1] * 3.0));
      requested = kAllProjections[i];
    }
    if (f.requested != requested) fail(rule::kFactSelection, e.seq, e.time, "projection does not follow its draw");

    const double factor = f.type == FactType::Eco ? setup_->tariff.emission_kg_per_kwh : setup_->tariff.tariff_eur_per_kwh;
    const double weekly = setup_->kb.habits.weekly_on_hours(rec.appliance);
    const Projection used = weekly > 0.0 ? requested : Projection::Actual;
    if (f.projection != used) fail(rule::kFactValue, e.seq, e.time, "projection fallback not applied as expected");
    double energy = 0.0;
    switch (used) {
      case Projection::Actual: energy = dev.rated_kw * hours(e.time - dev.on_since); break;
      case Projection::Monthly: energy = dev.rated_kw * weekly * (52.0 / 12.0); break;
      case Projection::Annual: energy = dev.rated_kw * weekly * 52.0; break;
    }
    if (!close_enough(f.energy_kwh, energy, tol) || !close_enough(f.value, energy * factor, tol) ||
        f.factor != factor || f.rated_kw != dev.rated_kw)
      fail(rule::kFactValue, e.seq, e.time, "fact energy/value disagree with metered usage");
    if (used == Projection::Monthly) {
      const double annual = dev.rated_kw * weekly * 52.0 * factor;
      if (!close_enough(annual, 12.0 * f.value, tol))
        fail(rule::kFactValue, e.seq, e.time, "annual figure is not 12 x monthly");
    }
    if (f.projection == Projection::Actual) {
      auto& q = quoted_[{rec.appliance, dev.period}];
      q = std::max(q, f.energy_kwh);
    }
  }

  void on(const SessionEvent& e, const ResponseRecorded& p) {
    if (!started(e)) return;
    ++report_.responses;
    auto it = recs_.find(p.rec_id);
    if (it == recs_.end()) {
      fail(rule::kStructure, e.seq, e.time, "response to unknown recommendation " + std::to_string(p.rec_id));
      return;
    }
    if (pending_ != p.rec_id) {
      fail(rule::kResponseWindow, e.seq, e.time, "response to a recommendation that is not pending");
      return;
    }
    const auto& rec = it->second;
    if (p.response == Response::None) {
      if (e.time < rec.deadline) fail(rule::kResponseWindow, e.seq, e.time, "ignored before the deadline");
    } else if (e.time < rec.created_at || e.time > rec.deadline) {
      fail(rule::kResponseWindow, e.seq, e.time, "response outside the response window");
    }
    pending_.reset();
    auto& k = keys_[{rec.appliance, rec.reason.kind}];
    switch (p.response) {
      case Response::Accept:
        k.episode_first.reset();
        k.consecutive_rejects = 0;
        awaiting_actuation_ = rec.id;
        break;
      case Response::Reject:
        k.last_reject = e.time;
        if (++k.consecutive_rejects >= setup_->engine.n_perm) k.permanently_paused = true;
        break;
      case Response::None:
        k.last_ignore = e.time;
        break;
    }
    if (rec.fact) pending_profile_ = {rec.id, rec.fact->type, p.response};
  }

  void on(const SessionEvent& e, const ActuationApplied& p) {
    if (!started(e)) return;
    auto it = room_.devices.find(p.appliance);
    if (it == room_.devices.end()) {
      fail(rule::kStructure, e.seq, e.time, "actuation of unknown appliance " + p.appliance);
      return;
    }
    auto& d = it->second;
    if (awaiting_actuation_) {
      const auto& rec = recs_.at(*awaiting_actuation_);
      if (p.automatic || p.rec_id != rec.id || p.appliance != rec.appliance)
        fail(rule::kActuation, e.seq, e.time, "actuation does not match the accepted recommendation");
      awaiting_actuation_.reset();
    } else if (!p.automatic) {
      fail(rule::kActuation, e.seq, e.time, "actuation without an accepted recommendation");
    }
    if (p.applied != d.on) fail(rule::kActuation, e.seq, e.time, "actuation result disagrees with the appliance state");
    if (p.applied) {
      room_.meter(d, e.time);
      d.power = 0.0;
      d.on = false;
    }
    d.expect_off = true;
  }

  void on(const SessionEvent& e, const ProfileUpdated& p) {
    if (!started(e)) return;
    if (!pending_profile_ || pending_profile_->rec_id != p.rec_id || pending_profile_->fact != p.fact ||
        pending_profile_->response != p.response) {
      fail(rule::kProfileUpdate, e.seq, e.time, "profile update does not match the last response");
    } else {
      const auto& a = setup_->adapt;
      double& w = p.fact == FactType::Eco ? w_eco_ : w_econ_;
      if (p.response == Response::Accept) w += a.beta;
      if (p.response == Response::Reject) w = std::max(w - a.beta, a.w_min);
    }
    pending_profile_.reset();
    if (p.w_eco != w_eco_ || p.w_econ != w_econ_) {
      std::ostringstream os;
      os << "weights (" << p.w_eco << ", " << p.w_econ << ") expected (" << w_eco_ << ", " << w_econ_ << ")";
      fail(rule::kProfileUpdate, e.seq, e.time, os.str());
      w_eco_ = p.w_eco;
      w_econ_ = p.w_econ;
    }
  }

  void on(const SessionEvent& e, const ReissueReset& p) {
    if (!started(e)) return;
    auto& k = keys_[{p.appliance, p.reason}];
    if (p.cause == ResetCause::ConditionCleared) {
      auto it = room_.devices.find(p.appliance);
      if (it != room_.devices.end() && holds(p.reason, it->second, e.time))
        fail(rule::kEpisodeReset, e.seq, e.time, "episode closed while its condition still holds");
      if (!k.episode_first) fail(rule::kEpisodeReset, e.seq, e.time, "no episode to close");
      if (k.permanently_paused) fail(rule::kEpisodeReset, e.seq, e.time, "permanently paused key closed");
    } else {
      if (!k.permanently_paused) fail(rule::kEpisodeReset, e.seq, e.time, "re-enable of a key that is not paused");
      k.permanently_paused = false;
      k.consecutive_rejects = 0;
    }
    k.episode_first.reset();
  }

  void on(const SessionEvent& e, const SessionFinished&) {
    if (!started(e)) return;
    pending_.reset();
    finished_ = true;
  }

  void close_energy() {
    for (auto& [id, d] : room_.devices) room_.meter(d, last_time_);
    report_.metered_kwh = room_.metered_kwh;
    report_.quoted_kwh = 0.0;
    for (const auto& [key, kwh] : quoted_) report_.quoted_kwh += kwh;
    if (report_.quoted_kwh > report_.metered_kwh * (1.0 + opt_.relative_tolerance) + 1e-12) {
      std::ostringstream os;
      os << "quoted " << report_.quoted_kwh << " kWh exceeds metered " << report_.metered_kwh << " kWh";
      fail(rule::kEnergyClosure, last_seq_, last_time_, os.str());
    }
  }

  struct PendingProfile {
    std::uint64_t rec_id;
    FactType fact;
    Response response;
  };

  AuditOptions opt_;
  AuditReport report_;
  std::optional<SessionSetup> setup_;
  Room room_;
  std::map<std::pair<ApplianceId, ReasonKind>, KeyTrack> keys_;
  std::map<std::uint64_t, Recommendation> recs_;
  std::map<std::pair<ApplianceId, int>, double> quoted_;
  std::optional<std::uint64_t> pending_;
  std::optional<std::uint64_t> awaiting_actuation_;
  std::optional<PendingProfile> pending_profile_;
  std::uint64_t next_id_ = 1;
  std::uint64_t rng_draws_ = 0;
  double w_eco_ = 1.0;
  double w_econ_ = 1.0;
  std::uint64_t last_seq_ = 0;
  Timestamp last_time_;
  bool finished_ = false;
};

}  // namespace

AuditReport audit_log(std::span<const SessionEvent> events, const AuditOptions& opt) {
  return Auditor(opt).run(events);
}

void to_json(Json& j, const Violation& v) {
  j = Json{{"rule", v.rule}, {"seq", v.seq}, {"t", v.time}, {"detail", v.detail}};
}

void to_json(Json& j, const AuditReport& r) {
  j = Json{{"ok", r.ok()},
           {"events", r.events},
           {"recommendations", r.recommendations},
           {"responses", r.responses},
           {"quoted_kwh", r.quoted_kwh},
           {"metered_kwh", r.metered_kwh},
           {"violations", r.violations}};
}

}  // namespace eerec
