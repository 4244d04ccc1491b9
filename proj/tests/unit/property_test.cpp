#include <doctest.h>

#include <cmath>

#include "eerec/adapt.hpp"
#include "eerec/audit.hpp"
#include "eerec/engine.hpp"
#include "eerec/explain.hpp"
#include "eerec/session.hpp"
#include "eerec/sim.hpp"
#include "support.hpp"

using namespace eerec;

namespace {

// Hand-rolled generator over a fixed-seed engine.
struct Gen {
  std::mt19937_64 e;
  explicit Gen(std::uint64_t seed) : e(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(e); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(e); }
  bool coin(double p = 0.5) { return real(0, 1) < p; }
  template <typename T, std::size_t N>
  T pick(const T (&xs)[N]) {
    return xs[integer(0, static_cast<int>(N) - 1)];
  }

  std::vector<SensorReading> motion_week(int week) {
    std::vector<SensorReading> out;
    const double p = real(0.0, 1.0);
    for (int d = 0; d < kDaysPerWeek; ++d)
      for (int slot = 0; slot < kSlotsPerDay; slot += integer(1, 6))
        out.push_back(test::motion(Timestamp::at(week, static_cast<Weekday>(d), 0) + Duration{slot * kSlotSeconds},
                                   coin(p)));
    return out;
  }

  ContextSnapshot snapshot(Timestamp t) {
    auto s = test::snapshot(t, coin(),
                            {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, coin(),
                                             t - Duration{integer(0, 5 * 3600)}),
                             test::appliance("lights", ApplianceKind::Lights, 0.1, coin(),
                                             t - Duration{integer(0, 5 * 3600)})});
    s.indoor_temp = real(18, 32);
    s.outdoor_temp = real(15, 38);
    s.outdoor_lux = real(0, 60000);
    s.absent_for = s.room_occupied ? Duration{integer(0, 299)} : Duration{integer(300, 7200)};
    return s;
  }
};

}  // namespace

TEST_SUITE("property") {
  TEST_CASE("aggregation is additive over disjoint weeks") {
    Gen g(1);
    for (int i = 0; i < 20; ++i) {
      const auto a = g.motion_week(0);
      const auto b = g.motion_week(1);
      auto both = a;
      both.insert(both.end(), b.begin(), b.end());
      auto merged = aggregate(a);
      merged.merge(aggregate(b));
      CHECK(merged == aggregate(both));
    }
  }

  TEST_CASE("an all-present week never lowers an observed cell") {
    Gen g(2);
    for (int i = 0; i < 10; ++i) {
      auto readings = g.motion_week(0);
      const auto more = g.motion_week(1);
      readings.insert(readings.end(), more.begin(), more.end());
      const auto before = occupancy_profile(aggregate(readings), 2);
      for (int d = 0; d < kDaysPerWeek; ++d)
        for (int slot = 0; slot < kSlotsPerDay; ++slot)
          readings.push_back(test::motion(Timestamp::at(2, static_cast<Weekday>(d), 0) + Duration{slot * kSlotSeconds},
                                          true));
      const auto after = occupancy_profile(aggregate(readings), 3);
      for (int d = 0; d < kDaysPerWeek; ++d)
        for (int slot = 0; slot < kSlotsPerDay; ++slot) {
          REQUIRE(after.p[d][slot] >= 0.0);
          REQUIRE(after.p[d][slot] <= 1.0);
          REQUIRE(after.p[d][slot] >= before.p[d][slot]);
        }
    }
  }

  TEST_CASE("micro-moment detection and rule evaluation are pure") {
    Gen g(3);
    KnowledgeBase kb;
    for (auto& day : kb.occupancy.p)
      for (auto& v : day) v = g.real(0, 1);
    for (int i = 0; i < 500; ++i) {
      const auto t = Timestamp::at(0, Weekday::Tuesday, 9) + Duration{i * 60};
      const auto prev = g.snapshot(t - Duration{60});
      const auto cur = g.snapshot(t);
      const auto a = detect_micro_moments(cur, prev, Thresholds{});
      const auto b = detect_micro_moments(cur, prev, Thresholds{});
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k].kind == b[k].kind && a[k].appliance == b[k].appliance));
      const auto mode = g.pick(kAllModes);
      const auto r1 = evaluate_triggers(cur, kb, ReissueState{}, mode, EngineConfig{});
      const auto r2 = evaluate_triggers(cur, kb, ReissueState{}, mode, EngineConfig{});
      CHECK(r1 == r2);
      CHECK(r1.size() <= cur.appliances.size());
      // no appliance twice
      if (r1.size() == 2) CHECK(r1[0].appliance != r1[1].appliance);
    }
  }

  TEST_CASE("fact type probability is scale invariant") {
    Gen g(4);
    for (int i = 0; i < 1000; ++i) {
      PersuasionProfile p;
      p.w_eco = g.real(0.1, 10);
      p.w_econ = g.real(0.1, 10);
      const double k = g.real(0.01, 100);
      PersuasionProfile q = p;
      q.w_eco *= k;
      q.w_econ *= k;
      CHECK(q.p_eco() == doctest::Approx(p.p_eco()).epsilon(1e-12));
    }
  }

  TEST_CASE("annual is twelve months and actual grows with time") {
    Gen g(5);
    for (int i = 0; i < 1000; ++i) {
      const auto a = test::appliance("x", ApplianceKind::AirConditioner, g.real(0.01, 5), true);
      const double weekly = g.real(0.1, 80);
      const auto type = g.pick(kAllFactTypes);
      const double c = g.real(0.05, 0.5), e = g.real(0.05, 1.0);
      const Timestamp since{g.integer(0, 100000)};
      const auto now = since + Duration{g.integer(0, 20000)};
      const auto m = compute_savings(a, since, now, c, e, weekly, type, Projection::Monthly);
      const auto y = compute_savings(a, since, now, c, e, weekly, type, Projection::Annual);
      CHECK(std::abs(y.value - 12.0 * m.value) <= 1e-9 * y.value);
      const auto t1 = compute_savings(a, since, now, c, e, weekly, type, Projection::Actual);
      const auto t2 = compute_savings(a, since, now + Duration{g.integer(0, 3600)}, c, e, weekly, type,
                                      Projection::Actual);
      CHECK(t1.value <= t2.value);
      CHECK(std::abs(t1.energy_kwh - a.rated_kw * t1.usage_hours) <= 1e-9 * std::max(1.0, t1.energy_kwh));
    }
  }

  TEST_CASE("profile updates keep the floor and the ordering") {
    Gen g(6);
    const Response responses[] = {Response::Accept, Response::Reject, Response::None};
    for (int i = 0; i < 200; ++i) {
      PersuasionProfile a, b;
      a.w_eco = g.real(0.1, 3);
      b.w_eco = a.w_eco + g.real(0.0, 2);
      const bool ordered = a.p_eco() <= b.p_eco();
      for (int k = 0; k < 40; ++k) {
        const auto f = g.pick(kAllFactTypes);
        const auto r = g.pick(responses);
        const auto a2 = update_profile(a, f, Projection::Actual, k, r);
        if (r == Response::None) CHECK((a2.w_eco == a.w_eco && a2.w_econ == a.w_econ));
        a = a2;
        b = update_profile(b, f, Projection::Actual, k, r);
        REQUIRE(a.w_eco >= 0.1);
        REQUIRE(a.w_econ >= 0.1);
      }
      // the floor can only merge two users, never swap them
      CHECK((a.p_eco() <= b.p_eco() + 1e-12) == ordered);
    }
  }

  TEST_CASE("dynamics contract for random states") {
    Gen g(7);
    for (int i = 0; i < 1000; ++i) {
      IndoorState s;
      s.temp = g.real(10, 40);
      const bool ac = g.coin();
      s.appliances = {test::appliance("ac", ApplianceKind::AirConditioner, 3.2, ac)};
      const double out = g.real(10, 40);
      const double target = ac ? 24.0 : out;
      const auto next = step_dynamics(s, out, 0.0, Duration{60}, DynamicsConfig{});
      if (s.temp != target) CHECK(std::abs(next.temp - target) < std::abs(s.temp - target));
    }
  }

  TEST_CASE("random sessions replay and audit cleanly") {
    Gen g(8);
    const auto spec = office_week_spec();
    const auto kb = history_knowledge(spec, spec.history_weeks, 1);
    for (int i = 0; i < 12; ++i) {
      RunOptions opt;
      opt.mode = g.pick(kAllModes);
      opt.seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30));
      opt.days = g.integer(1, 2);
      opt.kb = kb;
      if (g.coin()) opt.projection = ProjectionPolicy::constant(g.pick(kAllProjections));
      const auto persona = Persona::constant("p", g.real(0, 1), g.real(0, 0.5));
      const auto log = run_session(spec, persona, opt);
      auto session = Session::resume(log);
      CHECK(state_hash(replay(log.events())) == state_hash(session.state()));
      const auto report = audit_log(log.events());
      CAPTURE(Json(report).dump());
      CHECK(report.ok());
    }
  }
}
