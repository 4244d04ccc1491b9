#include <doctest.h>

#include "eerec/errors.hpp"
#include "eerec/session.hpp"
#include "support.hpp"

using namespace eerec;

namespace {

const Timestamp kT0 = Timestamp::at(3, Weekday::Monday, 8);

SessionSetup office_setup(ScenarioMode mode) {
  SessionSetup s;
  s.session_id = "unit";
  s.user = "u";
  s.mode = mode;
  s.seed = 11;
  s.appliances = {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, false),
                  test::appliance("lights", ApplianceKind::Lights, 0.1, false)};
  s.kb.habits.appliances["ac"].weekly_on_hours = 10.0;
  return s;
}

void feed_environment(Session& s, Timestamp t, bool moving) {
  s.ingest(test::reading(t, SensorKind::Temperature, 28.0));
  s.ingest(test::reading(t, SensorKind::Temperature, 31.0, Placement::Outdoor));
  s.ingest(test::reading(t, SensorKind::Luminosity, 450.0));
  s.ingest(test::reading(t, SensorKind::Luminosity, 5000.0, Placement::Outdoor));
  s.ingest(test::motion(t, moving));
}

// A/C switched on at kT0 with the user present, last motion at +1 min.
Session away_session(ScenarioMode mode) {
  auto s = Session::start(office_setup(mode), kT0);
  feed_environment(s, kT0, true);
  s.ingest(test::power(kT0, "ac", 3.2));
  s.tick(kT0);
  for (int m = 1; m <= 5; ++m) {
    const auto t = kT0 + Duration{m * 60};
    feed_environment(s, t, m == 1);
    s.ingest(test::power(t, "ac", 3.2));
    CHECK_FALSE(s.tick(t).has_value());
  }
  return s;
}

template <typename T>
std::vector<const T*> events_of(const Session& s) {
  std::vector<const T*> out;
  for (const auto& e : s.log().events())
    if (const auto* p = std::get_if<T>(&e.payload)) out.push_back(p);
  return out;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("user away issues one explainable recommendation") {
    auto s = away_session(ScenarioMode::Explainable);
    const auto t = kT0 + Duration{6 * 60};
    feed_environment(s, t, false);
    const auto rec = s.tick(t);
    REQUIRE(rec);
    CHECK(rec->id == 1);
    CHECK(rec->reason.kind == ReasonKind::UserAway);
    REQUIRE(rec->fact);
    CHECK(s.state().pending == std::optional<std::uint64_t>(1));

    const auto issued = events_of<RecommendationIssued>(s);
    REQUIRE(issued.size() == 1);
    CHECK(message_conforms(issued[0]->message, ScenarioMode::Explainable));
    CHECK(issued[0]->draws.size() == 2);
    CHECK(issued[0]->rng_draws == 2);
    CHECK(events_of<MicroMomentDetected>(s).size() >= 1);

    // nothing else while one is pending
    CHECK_FALSE(s.tick(t + Duration{10}).has_value());
  }

  TEST_CASE("accept switches the appliance off and updates the profile") {
    auto s = away_session(ScenarioMode::Persuasive);
    const auto t = kT0 + Duration{6 * 60};
    feed_environment(s, t, false);
    const auto rec = s.tick(t);
    REQUIRE(rec);
    const auto done = s.respond(rec->id, Response::Accept, t + Duration{5});
    CHECK(done.lifecycle == Lifecycle::Accepted);
    const auto& ev = s.log().events();
    const auto n = ev.size();
    REQUIRE(std::holds_alternative<ResponseRecorded>(ev[n - 3].payload));
    const auto* act = std::get_if<ActuationApplied>(&ev[n - 2].payload);
    REQUIRE(act);
    CHECK(act->applied);
    CHECK(act->rec_id == rec->id);
    const auto* upd = std::get_if<ProfileUpdated>(&ev[n - 1].payload);
    REQUIRE(upd);
    CHECK(upd->response == Response::Accept);
    CHECK_FALSE(s.snapshot(t + Duration{5})->find("ac")->on);
    CHECK_FALSE(s.state().pending);
    CHECK_THROWS_AS(s.respond(rec->id, Response::Reject, t + Duration{6}), ConflictError);
    CHECK_THROWS_AS(s.respond(99, Response::Reject, t + Duration{6}), NotFoundError);
  }

  TEST_CASE("plain sessions consume no engine draws") {
    auto s = away_session(ScenarioMode::Plain);
    const auto t = kT0 + Duration{6 * 60};
    feed_environment(s, t, false);
    REQUIRE(s.tick(t));
    CHECK(s.state().rng_draws == 0);
    CHECK(events_of<RecommendationIssued>(s)[0]->message.fact == std::nullopt);
  }

  TEST_CASE("expire records the ignore only at the deadline") {
    auto s = away_session(ScenarioMode::Explainable);
    const auto t = kT0 + Duration{6 * 60};
    feed_environment(s, t, false);
    const auto rec = s.tick(t);
    REQUIRE(rec);
    CHECK_FALSE(s.expire(t + Duration{19}));
    CHECK(s.expire(t + Duration{20}));
    CHECK(s.state().recommendations.at(rec->id).lifecycle == Lifecycle::Ignored);
    CHECK(s.state().reissue.get({"ac", ReasonKind::UserAway}).status == ReissueStatus::Paused);
  }

  TEST_CASE("finishing with a pending recommendation ceases it") {
    auto s = away_session(ScenarioMode::Explainable);
    const auto t = kT0 + Duration{6 * 60};
    feed_environment(s, t, false);
    const auto rec = s.tick(t);
    REQUIRE(rec);
    s.finish(t + Duration{3});
    CHECK(s.state().finished);
    CHECK(s.state().recommendations.at(rec->id).lifecycle == Lifecycle::Ceased);
    CHECK(std::holds_alternative<SessionFinished>(s.log().events().back().payload));
    CHECK_FALSE(s.tick(t + Duration{60}).has_value());
  }

  TEST_CASE("resume continues exactly where the log stopped") {
    auto full = away_session(ScenarioMode::Explainable);
    auto part_log = full.log();
    auto resumed = Session::resume(part_log);
    CHECK(resumed.state() == full.state());

    for (Session* s : {&full, &resumed}) {
      const auto t = kT0 + Duration{6 * 60};
      feed_environment(*s, t, false);
      const auto rec = s->tick(t);
      REQUIRE(rec);
      s->respond(rec->id, Response::Reject, t + Duration{4});
      s->finish(t + Duration{60});
    }
    REQUIRE(resumed.log().size() == full.log().size());
    for (std::size_t i = 0; i < full.log().size(); ++i)
      CHECK(to_jsonl_line(resumed.log().events()[i]) == to_jsonl_line(full.log().events()[i]));
    CHECK(state_hash(replay(full.log().events())) == state_hash(full.state()));
  }

  TEST_CASE("apply rejects events that do not fit the state") {
    SessionState st;
    CHECK_THROWS_AS(st.apply(SessionEvent{1, kT0, ResponseRecorded{1, Response::Accept}}), ValidationError);
  }

  TEST_CASE("setup validation") {
    auto bad = office_setup(ScenarioMode::Plain);
    bad.appliances.push_back(bad.appliances.front());
    CHECK_THROWS_AS(Session::start(bad, kT0), ValidationError);
    auto none = office_setup(ScenarioMode::Plain);
    none.appliances.clear();
    CHECK_THROWS_AS(Session::start(none, kT0), ValidationError);
  }
}
