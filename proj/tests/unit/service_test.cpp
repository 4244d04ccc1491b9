#include <doctest.h>

#include "eerec/errors.hpp"
#include "eerec/service.hpp"
#include "eerec/session.hpp"
#include "support.hpp"

using namespace eerec;

namespace {

struct Fixture {
  test::TempDir dir;
  std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>();

  ServiceConfig config(bool pause = false) const {
    ServiceConfig cfg;
    cfg.data_dir = dir.path();
    cfg.pause_without_subscribers = pause;
    return cfg;
  }
};

CreateSessionRequest request(const std::string& mode, std::uint64_t seed = 5, int days = 1) {
  return Json{{"mode", mode}, {"seed", seed}, {"days", days}}.get<CreateSessionRequest>();
}

// Advances wall time one second at a time until a recommendation shows up.
Json wait_pending(SessionManager& m, ManualClock& clock, const std::string& id) {
  for (int i = 0; i < 2000; ++i) {
    clock.advance(1.0);
    m.pump();
    const auto h = m.handle(id);
    if (!h["pending"].is_null()) return h["pending"];
    if (h["status"] == "finished") break;
  }
  return nullptr;
}

void run_to_end(SessionManager& m, ManualClock& clock, const std::string& id) {
  while (!m.finished(id)) {
    clock.advance(30.0);
    m.pump();
  }
}

std::vector<std::string> lines(SessionManager& m, const std::string& id) {
  std::vector<std::string> out;
  for (const auto& item : m.wait_events(id, 0, std::chrono::milliseconds(0))) out.push_back(item.data);
  return out;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("create starts Monday 08:00") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    const auto h = m.create(request("explainable"));
    CHECK(h["mode"] == "explainable");
    CHECK(h["time"] == "Mon 08:00:00");
    CHECK(h["status"] == "running");
    CHECK(h["pending"].is_null());
    CHECK(std::filesystem::exists(f.dir.path() / "sessions" / (h["id"].get<std::string>() + ".jsonl")));
    CHECK(m.list().size() == 1);
  }

  TEST_CASE("unknown spec and bad input") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    auto req = request("plain");
    req.spec_id = "x";
    CHECK_THROWS_AS(m.create(req), NotFoundError);
    CHECK_THROWS_AS(request("loud"), ValidationError);
    CHECK_THROWS_AS(m.handle("nope"), NotFoundError);
  }

  TEST_CASE("accept within the window switches the appliance off") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    const std::string id = m.create(request("explainable"))["id"];
    const auto pending = wait_pending(m, *f.clock, id);
    REQUIRE_FALSE(pending.is_null());
    CHECK(pending["remaining_s"].get<double>() == 20.0);
    CHECK(pending.contains("message"));
    const auto rid = pending["rec_id"].get<std::uint64_t>();

    f.clock->advance(5.0);
    CHECK(m.handle(id)["pending"]["remaining_s"].get<double>() == 15.0);
    const auto ack = m.respond(id, rid, Response::Accept);
    CHECK(ack["lifecycle"] == "accepted");
    REQUIRE_FALSE(ack["actuation"].is_null());
    CHECK(ack["actuation"]["applied"] == true);

    const auto items = m.wait_events(id, 0, std::chrono::milliseconds(0));
    // the last response; earlier recommendations may have expired unanswered
    auto resp = std::find_if(items.rbegin(), items.rend(), [](const StreamItem& i) { return i.event == "response"; })
                    .base() - 1;
    REQUIRE(resp >= items.begin());
    REQUIRE(resp + 1 != items.end());
    CHECK((resp + 1)->event == "actuation");
    CHECK(*(resp + 1)->seq == ack["actuation"]["seq"].get<std::uint64_t>());
    // simulated response time follows the wall-clock delay
    const auto rec_line = Json::parse(resp->data);
    CHECK(rec_line["t"].get<std::int64_t>() - pending["created_at"].get<std::int64_t>() == 5);

    try {
      m.respond(id, rid, Response::Accept);
      FAIL("duplicate accept");
    } catch (const ConflictError& e) {
      CHECK(e.kind() == ConflictError::Kind::AlreadyResolved);
    }
  }

  TEST_CASE("a late response finds the window elapsed") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    const std::string id = m.create(request("plain"))["id"];
    const auto pending = wait_pending(m, *f.clock, id);
    REQUIRE_FALSE(pending.is_null());
    f.clock->advance(25.0);
    try {
      m.respond(id, pending["rec_id"].get<std::uint64_t>(), Response::Accept);
      FAIL("late accept");
    } catch (const ConflictError& e) {
      CHECK(e.kind() == ConflictError::Kind::WindowElapsed);
    }
    CHECK_THROWS_AS(m.respond(id, 999, Response::Reject), NotFoundError);
    CHECK_THROWS_AS(m.respond(id, 1, Response::None), ValidationError);
  }

  TEST_CASE("the window is wall-clock time whatever the speedup") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    auto req = request("plain");
    req.speedup = 600.0;
    const std::string id = m.create(req)["id"];
    const auto pending = wait_pending(m, *f.clock, id);
    REQUIRE_FALSE(pending.is_null());
    f.clock->advance(19.0);
    m.pump();
    CHECK_FALSE(m.handle(id)["pending"].is_null());
    f.clock->advance(1.0);
    m.pump();
    const auto h = m.handle(id);
    CHECK((h["pending"].is_null() || h["pending"]["rec_id"] != pending["rec_id"]));
  }

  TEST_CASE("same seed and scripted responses give identical logs") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    const std::string a = m.create(request("persuasive", 8))["id"];
    const std::string b = m.create(request("persuasive", 8))["id"];
    int answered = 0;
    for (int i = 0; i < 3000 && !(m.finished(a) && m.finished(b)); ++i) {
      f.clock->advance(1.0);
      m.pump();
      const auto pa = m.handle(a)["pending"];
      const auto pb = m.handle(b)["pending"];
      REQUIRE(pa.is_null() == pb.is_null());
      if (!pa.is_null() && answered < 4) {
        f.clock->advance(3.0);
        const auto r = answered % 2 ? Response::Reject : Response::Accept;
        m.respond(a, pa["rec_id"].get<std::uint64_t>(), r);
        m.respond(b, pb["rec_id"].get<std::uint64_t>(), r);
        ++answered;
      }
    }
    CHECK(answered > 0);
    REQUIRE(m.finished(a));
    CHECK(lines(m, a) == lines(m, b));
  }

  TEST_CASE("stream resumption and final stats") {
    Fixture f;
    SessionManager m(f.config(), f.clock);
    const std::string id = m.create(request("explainable"))["id"];
    run_to_end(m, *f.clock, id);
    const auto all = m.wait_events(id, 0, std::chrono::milliseconds(0));
    REQUIRE(all.size() > 43);
    const auto rest = m.wait_events(id, 42, std::chrono::milliseconds(0));
    REQUIRE_FALSE(rest.empty());
    CHECK(*rest.front().seq == 43);
    CHECK(rest.size() == all.size() - 42);
    CHECK(all.back().event == "session_finished");
    const auto stats = m.final_stats(id);
    REQUIRE(stats);
    CHECK(stats->event == "stats");
    CHECK(Json::parse(stats->data)["summary"]["issued"].get<int>() > 0);
    const auto tick = m.tick(id);
    CHECK(tick.event == "tick");
    CHECK_FALSE(tick.seq);
    CHECK(m.report(id)["status"] == "finished");
  }

  TEST_CASE("sessions pause without subscribers") {
    Fixture f;
    SessionManager m(f.config(true), f.clock);
    const std::string id = m.create(request("plain"))["id"];
    CHECK(m.handle(id)["status"] == "paused");
    f.clock->advance(100.0);
    m.pump();
    CHECK(m.handle(id)["last_seq"] == 1);
    {
      auto sub = m.subscribe(id);
      CHECK(m.handle(id)["status"] == "running");
      f.clock->advance(2.0);
      m.pump();
      CHECK(m.handle(id)["last_seq"].get<int>() > 1);
    }
    CHECK(m.handle(id)["status"] == "paused");
    const auto seq = m.handle(id)["last_seq"];
    f.clock->advance(100.0);
    m.pump();
    CHECK(m.handle(id)["last_seq"] == seq);
  }

  TEST_CASE("restart recovers the same sessions") {
    Fixture f;
    Json running, finished_report;
    std::string live_id, done_id;
    std::uint64_t live_hash = 0;
    {
      SessionManager m(f.config(), f.clock);
      done_id = m.create(request("explainable", 2))["id"];
      live_id = m.create(request("persuasive", 3, 0))["id"];
      const auto p = wait_pending(m, *f.clock, live_id);
      REQUIRE_FALSE(p.is_null());
      f.clock->advance(2.0);
      m.respond(live_id, p["rec_id"].get<std::uint64_t>(), Response::Accept);
      run_to_end(m, *f.clock, done_id);
      REQUIRE_FALSE(m.finished(live_id));
      if (!m.handle(live_id)["pending"].is_null()) {
        f.clock->advance(25.0);
        m.pump();
      }
      running = m.handle(live_id);
      finished_report = m.report(done_id);
      live_hash = state_hash(replay(read_log_file((f.dir.path() / "sessions" / (live_id + ".jsonl")).string()).events()));
    }
    SessionManager again(f.config(), f.clock);
    CHECK(again.recover() == 2);
    CHECK(again.report(done_id) == finished_report);
    CHECK(again.finished(done_id));
    const auto h = again.handle(live_id);
    if (running["pending"].is_null()) CHECK(h == running);
    CHECK(h["last_seq"] == running["last_seq"]);
    CHECK(h["t"] == running["t"]);
    CHECK(state_hash(replay(read_log_file((f.dir.path() / "sessions" / (live_id + ".jsonl")).string()).events())) ==
          live_hash);
    // new handles do not collide with recovered ones
    const std::string next = again.create(request("plain"))["id"];
    CHECK(next != live_id);
    CHECK(next != done_id);
  }

  TEST_CASE("data directory resolution") {
    CHECK(resolve_data_dir(std::string("/tmp/x")) == "/tmp/x");
    ::setenv("EEREC_DATA_DIR", "/tmp/from-env", 1);
    CHECK(resolve_data_dir(std::nullopt) == "/tmp/from-env");
    ::unsetenv("EEREC_DATA_DIR");
    CHECK(resolve_data_dir(std::nullopt) == "data");
  }
}
