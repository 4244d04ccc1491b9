#include <doctest.h>

#include "eerec/engine.hpp"
#include "eerec/errors.hpp"
#include "support.hpp"

using namespace eerec;

namespace {

const Timestamp kT0 = Timestamp::at(0, Weekday::Monday, 10);

KnowledgeBase kb_with_next_slot(Timestamp t, double p) {
  KnowledgeBase kb;
  kb.occupancy.p[static_cast<int>(t.day_of_week())][slot_of(t + Duration{kSlotSeconds})] = p;
  return kb;
}

Recommendation pending_rec(Timestamp created, const EngineConfig& cfg = {}) {
  Recommendation rec;
  rec.id = 1;
  rec.created_at = created;
  rec.appliance = "ac";
  rec.deadline = created + cfg.timing.response_window;
  return rec;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("occupied room with everything off") {
    const auto s = test::snapshot(kT0, true,
                                  {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, false),
                                   test::appliance("lights", ApplianceKind::Lights, 0.1, false)});
    CHECK(evaluate_triggers(s, KnowledgeBase{}, ReissueState{}, ScenarioMode::Explainable, EngineConfig{}).empty());
  }

  TEST_CASE("away six minutes with A/C on and low next-slot occupancy") {
    auto s = test::snapshot(kT0, false, {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, true)});
    s.absent_for = Duration{6 * 60};
    const auto recs =
        evaluate_triggers(s, kb_with_next_slot(kT0, 0.2), ReissueState{}, ScenarioMode::Plain, EngineConfig{});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].appliance == "ac");
    CHECK(recs[0].reason.kind == ReasonKind::UserAway);
    CHECK(recs[0].reason.p_occ_next == 0.2);
    CHECK(recs[0].deadline == kT0 + Duration{20});
    CHECK(recs[0].lifecycle == Lifecycle::Pending);

    // likely to come back: nothing
    CHECK(evaluate_triggers(s, kb_with_next_slot(kT0, 0.5), ReissueState{}, ScenarioMode::Plain, EngineConfig{})
              .empty());
  }

  TEST_CASE("outdoor cooling with indoor 26 and outdoor 24") {
    auto s = test::snapshot(kT0, true, {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, true)});
    s.indoor_temp = 26.0;
    s.outdoor_temp = 24.0;
    const auto recs = evaluate_triggers(s, KnowledgeBase{}, ReissueState{}, ScenarioMode::Persuasive, EngineConfig{});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].reason.kind == ReasonKind::OutdoorCoolingAvailable);
    CHECK(recs[0].reason.indoor_temp == 26.0);
    CHECK(recs[0].reason.outdoor_temp == 24.0);
  }

  TEST_CASE("natural light turns off the lights only") {
    auto s = test::snapshot(kT0, true,
                            {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, true),
                             test::appliance("lights", ApplianceKind::Lights, 0.1, true)});
    s.outdoor_lux = 25000.0;
    const auto recs = evaluate_triggers(s, KnowledgeBase{}, ReissueState{}, ScenarioMode::Plain, EngineConfig{});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].appliance == "lights");
    CHECK(recs[0].reason.kind == ReasonKind::NaturalLightAvailable);
  }

  TEST_CASE("absence outranks the favorable-context rules") {
    auto s = test::snapshot(kT0, false, {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, true)});
    s.indoor_temp = 26.0;
    s.outdoor_temp = 20.0;
    const auto recs = evaluate_triggers(s, KnowledgeBase{}, ReissueState{}, ScenarioMode::Plain, EngineConfig{});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].reason.kind == ReasonKind::UserAway);

    // a suppressed UserAway key still claims the appliance
    ReissueState rs;
    rs.entries[{"ac", ReasonKind::UserAway}].status = ReissueStatus::PermanentlyPaused;
    CHECK(evaluate_triggers(s, KnowledgeBase{}, rs, ScenarioMode::Plain, EngineConfig{}).empty());
  }

  TEST_CASE("rule toggles disable rules") {
    auto s = test::snapshot(kT0, false, {test::appliance("monitor", ApplianceKind::Monitor, 0.03, true)});
    EngineConfig cfg;
    CHECK(evaluate_triggers(s, KnowledgeBase{}, ReissueState{}, ScenarioMode::Plain, cfg).size() == 1);
    cfg.rules.user_away = false;
    CHECK(evaluate_triggers(s, KnowledgeBase{}, ReissueState{}, ScenarioMode::Plain, cfg).empty());
  }

  TEST_CASE("accept within the window") {
    auto entry = note_issued(ReissueEntry{}, kT0);
    CHECK(entry.status == ReissueStatus::Pending);
    const auto out = record_response(pending_rec(kT0), Response::Accept, kT0 + Duration{5}, entry, EngineConfig{});
    CHECK(out.rec.lifecycle == Lifecycle::Accepted);
    CHECK(out.actuate);
    CHECK(out.entry.accept_count == 1);
    CHECK(out.rec.resolved_at == kT0 + Duration{5});
  }

  TEST_CASE("no response by the deadline pauses ten minutes") {
    const EngineConfig cfg;
    auto entry = note_issued(ReissueEntry{}, kT0);
    const auto rec = pending_rec(kT0);
    CHECK_THROWS_AS(record_response(rec, Response::None, kT0 + Duration{19}, entry, cfg), ConflictError);
    const auto out = record_response(rec, Response::None, kT0 + Duration{20}, entry, cfg);
    CHECK(out.rec.lifecycle == Lifecycle::Ignored);
    CHECK_FALSE(out.actuate);
    CHECK(out.entry.paused_until == kT0 + Duration{20 + 600});
    CHECK(suppressed(out.entry, kT0 + Duration{619}, cfg.timing));
    CHECK_FALSE(suppressed(out.entry, kT0 + Duration{620}, cfg.timing));
  }

  TEST_CASE("late and repeated responses conflict") {
    const EngineConfig cfg;
    auto entry = note_issued(ReissueEntry{}, kT0);
    auto rec = pending_rec(kT0);
    try {
      record_response(rec, Response::Accept, kT0 + Duration{25}, entry, cfg);
      FAIL("late accept accepted");
    } catch (const ConflictError& e) {
      CHECK(e.kind() == ConflictError::Kind::WindowElapsed);
    }
    const auto done = record_response(rec, Response::Accept, kT0 + Duration{3}, entry, cfg);
    try {
      record_response(done.rec, Response::Accept, kT0 + Duration{4}, done.entry, cfg);
      FAIL("second accept accepted");
    } catch (const ConflictError& e) {
      CHECK(e.kind() == ConflictError::Kind::AlreadyResolved);
    }
  }

  TEST_CASE("reject pauses one hour") {
    const EngineConfig cfg;
    const auto out =
        record_response(pending_rec(kT0), Response::Reject, kT0 + Duration{8}, note_issued({}, kT0), cfg);
    CHECK(out.rec.lifecycle == Lifecycle::Rejected);
    CHECK(out.entry.consecutive_rejects == 1);
    CHECK(suppressed(out.entry, kT0 + Duration{8 + 3599}, cfg.timing));
  }

  TEST_CASE("six ignores ten minutes apart cease the episode at one hour") {
    const EngineConfig cfg;
    ReissueEntry e;
    Timestamp t = kT0;
    for (int i = 0; i < 6; ++i) {
      REQUIRE_FALSE(suppressed(e, t, cfg.timing));
      e = note_issued(e, t);
      e = record_response(pending_rec(t), Response::None, t + cfg.timing.response_window, e, cfg).entry;
      if (i < 5) {
        CHECK(e.status == ReissueStatus::Paused);
        t = *e.paused_until;
        CHECK(t - kT0 < cfg.timing.episode_window);
      }
    }
    CHECK(e.status == ReissueStatus::Ceased);
    CHECK(suppressed(e, kT0 + Duration{3600}, cfg.timing));
    CHECK(suppressed(e, kT0 + Duration{5 * 3600}, cfg.timing));
    // the condition clears: a later episode may start again
    const auto fresh = close_episode(e);
    CHECK(fresh.status == ReissueStatus::Active);
    CHECK_FALSE(suppressed(fresh, kT0 + Duration{5 * 3600}, cfg.timing));
  }

  TEST_CASE("five accepts flag an automation candidate") {
    const EngineConfig cfg;
    ReissueEntry e;
    for (int i = 0; i < 5; ++i) {
      CHECK_FALSE(e.automation_candidate);
      const auto t = kT0 + Duration{i * 3600};
      e = record_response(pending_rec(t), Response::Accept, t + Duration{2}, note_issued(e, t), cfg).entry;
    }
    CHECK(e.automation_candidate);
    CHECK(e.accept_count == 5);
  }

  TEST_CASE("accept resets the consecutive rejects") {
    const EngineConfig cfg;
    ReissueEntry e;
    const Response seq[] = {Response::Reject, Response::Reject, Response::Accept};
    for (int i = 0; i < 3; ++i) {
      const auto t = kT0 + Duration{i * 7200};
      e = record_response(pending_rec(t), seq[i], t + Duration{2}, note_issued(e, t), cfg).entry;
    }
    CHECK(e.consecutive_rejects == 0);
    CHECK(e.status == ReissueStatus::Active);
  }

  TEST_CASE("three consecutive rejects pause permanently until re-enabled") {
    const EngineConfig cfg;
    ReissueEntry e;
    for (int i = 0; i < 3; ++i) {
      const auto t = kT0 + Duration{i * 7200};
      e = record_response(pending_rec(t), Response::Reject, t + Duration{2}, note_issued(e, t), cfg).entry;
    }
    CHECK(e.status == ReissueStatus::PermanentlyPaused);
    CHECK(suppressed(e, kT0 + Duration{30 * 86400}, cfg.timing));
    CHECK(close_episode(e).status == ReissueStatus::PermanentlyPaused);
    const auto back = re_enable(e);
    CHECK(back.status == ReissueStatus::Active);
    CHECK(back.consecutive_rejects == 0);
  }

  TEST_CASE("minimum spacing between issues of one key") {
    const TimingConfig timing;
    auto e = note_issued(ReissueEntry{}, kT0);
    e.status = ReissueStatus::Active;
    CHECK(suppressed(e, kT0 + Duration{599}, timing));
    CHECK_FALSE(suppressed(e, kT0 + Duration{600}, timing));
  }

  TEST_CASE("actuation") {
    auto ac = test::appliance("ac", ApplianceKind::AirConditioner, 3.2, true);
    const auto r = actuate(ac, kT0);
    CHECK(r.applied);
    CHECK_FALSE(r.ack.empty());
    CHECK_FALSE(ac.on);
    CHECK(ac.last_toggle == kT0);

    auto lights = test::appliance("lights", ApplianceKind::Lights, 0.1, false, Timestamp{5});
    const auto noop = actuate(lights, kT0);
    CHECK_FALSE(noop.applied);
    CHECK_FALSE(noop.ack.empty());
    CHECK(lights.last_toggle == Timestamp{5});
  }

  TEST_CASE("engine config round-trips bit-exact") {
    EngineConfig cfg;
    cfg.thresholds.delta_t = 0.1 + 0.2;
    cfg.occupancy_cutoff = 1.0 / 3.0;
    cfg.timing.response_window = Duration{21};
    cfg.timing.ignore_pause = Duration{599};
    cfg.n_auto = 7;
    cfg.rules.natural_light = false;
    const auto back = Json::parse(Json(cfg).dump()).get<EngineConfig>();
    CHECK(back == cfg);
  }
}
