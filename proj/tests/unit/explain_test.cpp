#include <doctest.h>

#include <cmath>

#include "eerec/errors.hpp"
#include "eerec/explain.hpp"
#include "support.hpp"

using namespace eerec;

namespace {

const Timestamp kOn = Timestamp::at(0, Weekday::Monday, 9);
const Appliance kAc = test::appliance("ac", ApplianceKind::AirConditioner, 3.2, true, kOn);

PersuasiveFact savings(Duration on_for, FactType type, Projection proj, double weekly = 0.0) {
  return compute_savings(kAc, kOn, kOn + on_for, 0.165, 0.3, weekly, type, proj);
}

Recommendation rec_for(ReasonKind kind, ScenarioMode mode) {
  Recommendation rec;
  rec.id = 3;
  rec.created_at = Timestamp::at(0, Weekday::Monday, 12, 0, 5);
  rec.appliance = "ac";
  rec.appliance_kind = ApplianceKind::AirConditioner;
  rec.reason.kind = kind;
  rec.mode = mode;
  rec.deadline = rec.created_at + Duration{20};
  return rec;
}

}  // namespace

TEST_SUITE("explain") {
  TEST_CASE("three hours of a 3.2 kW A/C at 0.165 EUR/kWh") {
    const auto f = savings(Duration{3 * 3600}, FactType::Econ, Projection::Actual);
    CHECK(f.usage_hours == 3.0);
    CHECK(std::abs(f.energy_kwh - 9.6) <= 1e-9 * 9.6);
    CHECK(std::abs(f.value - 1.584) <= 1e-9);
    CHECK(format_amount(f.value) == "1.58");
    CHECK(f.factor == 0.165);
    CHECK(f.projection == Projection::Actual);
  }

  TEST_CASE("emission factor gives kg of CO2") {
    const auto f = savings(Duration{3 * 3600}, FactType::Eco, Projection::Actual);
    CHECK(f.value == doctest::Approx(9.6 * 0.3).epsilon(1e-12));
    CHECK(format_amount(f.value) == "2.88");
  }

  TEST_CASE("zero duration is zero") {
    for (auto type : kAllFactTypes) {
      const auto f = savings(Duration{0}, type, Projection::Actual);
      CHECK(f.energy_kwh == 0.0);
      CHECK(f.value == 0.0);
    }
  }

  TEST_CASE("projections scale the weekly habit") {
    const double weekly = 15.0;
    const auto m = savings(Duration{3600}, FactType::Econ, Projection::Monthly, weekly);
    const auto a = savings(Duration{3600}, FactType::Econ, Projection::Annual, weekly);
    CHECK(m.energy_kwh == doctest::Approx(3.2 * weekly * 52.0 / 12.0).epsilon(1e-12));
    CHECK(a.energy_kwh == doctest::Approx(3.2 * weekly * 52.0).epsilon(1e-12));
    CHECK(std::abs(a.value - 12.0 * m.value) <= 1e-9 * a.value);
  }

  TEST_CASE("projection without habit hours falls back to actual") {
    const auto f = savings(Duration{2 * 3600}, FactType::Eco, Projection::Annual, 0.0);
    CHECK(f.projection == Projection::Actual);
    CHECK(f.requested == Projection::Annual);
    CHECK(f.energy_kwh == doctest::Approx(6.4));
  }

  TEST_CASE("invalid savings inputs") {
    CHECK_THROWS_AS(compute_savings(kAc, kOn, kOn - Duration{1}, 0.165, 0.3, 0, FactType::Eco, Projection::Actual),
                    ValidationError);
    CHECK_THROWS_AS(compute_savings(kAc, kOn, kOn, 0.0, 0.3, 0, FactType::Eco, Projection::Actual), ValidationError);
    CHECK_THROWS_AS(compute_savings(kAc, kOn, kOn, 0.165, -1.0, 0, FactType::Eco, Projection::Actual),
                    ValidationError);
  }

  TEST_CASE("display rounding is half away from zero") {
    CHECK(round_display(1.584) == 1.58);
    CHECK(round_display(0.125) == 0.13);
    CHECK(round_display(-0.125) == -0.13);
    CHECK(round_display(1.005) == 1.01);
    CHECK(format_amount(2.0) == "2.00");
  }

  TEST_CASE("fact type probability") {
    PersuasionProfile p;
    CHECK(p.p_eco() == 0.5);
    p.w_eco = 1.1;
    CHECK(p.p_eco() == doctest::Approx(1.1 / 2.1));
    CHECK(std::abs(p.p_eco() - 0.5238) < 1e-4);
    for (double x : {0.1, 1.0, 3.7, 250.0}) {
      PersuasionProfile q;
      q.w_eco = q.w_econ = x;
      CHECK(q.p_eco() == 0.5);
    }
    // selection threshold sits exactly at p_eco
    CHECK(select_fact_type(p, 1.1 / 2.1 - 1e-12) == FactType::Eco);
    CHECK(select_fact_type(p, 1.1 / 2.1 + 1e-12) == FactType::Econ);
  }

  TEST_CASE("projection selection") {
    Rng rng(5);
    const auto fixed = ProjectionPolicy::constant(Projection::Annual);
    for (int i = 0; i < 10; ++i) CHECK(select_projection(fixed, rng) == Projection::Annual);
    CHECK(rng.draws() == 0);

    std::map<Projection, int> counts;
    const int n = 30000;
    for (int i = 0; i < n; ++i) ++counts[select_projection(ProjectionPolicy::uniform_random(), rng)];
    CHECK(rng.draws() == static_cast<std::uint64_t>(n));
    for (auto p : kAllProjections) CHECK(std::abs(counts[p] / double(n) - 1.0 / 3.0) <= 0.01);

    Rng again(5);
    Rng replayed(5);
    for (int i = 0; i < 100; ++i)
      CHECK(select_projection(ProjectionPolicy{}, again) == select_projection(ProjectionPolicy{}, replayed));
  }

  TEST_CASE("plain message has timestamp and prompt only") {
    const auto s = test::snapshot(Timestamp::at(0, Weekday::Monday, 12, 0, 5), false, {kAc});
    const auto msg = compose_message(rec_for(ReasonKind::UserAway, ScenarioMode::Plain), s, std::nullopt,
                                     ScenarioMode::Plain);
    CHECK(msg.timestamp == "Mon 12:00:05");
    CHECK(msg.prompt == "Turn off the A/C?");
    CHECK(msg.options == std::vector<std::string>{"Accept", "Reject"});
    CHECK_FALSE(msg.context);
    CHECK_FALSE(msg.reason);
    CHECK_FALSE(msg.fact);
    CHECK(message_conforms(msg, ScenarioMode::Plain));
    CHECK_FALSE(message_conforms(msg, ScenarioMode::Explainable));
  }

  TEST_CASE("explainable away message with a monthly cost") {
    auto s = test::snapshot(Timestamp::at(0, Weekday::Monday, 12, 0, 5), false, {kAc});
    s.absent_for = Duration{7 * 60};
    const auto fact = savings(Duration{3 * 3600}, FactType::Econ, Projection::Monthly, 15.0);
    const auto msg =
        compose_message(rec_for(ReasonKind::UserAway, ScenarioMode::Explainable), s, fact, ScenarioMode::Explainable);
    REQUIRE(msg.context);
    REQUIRE(msg.reason);
    REQUIRE(msg.fact);
    CHECK_FALSE(msg.context->occupied);
    CHECK(msg.reason->find("empty") != std::string::npos);
    CHECK(msg.reason->find("7 minutes") != std::string::npos);
    CHECK(msg.fact->unit == "EUR");
    CHECK(msg.fact->text.find(format_amount(fact.value)) != std::string::npos);
    CHECK(msg.fact->text.find("month") != std::string::npos);
    CHECK(message_conforms(msg, ScenarioMode::Explainable));
    const auto text = render_text(msg);
    CHECK(text.find(*msg.reason) != std::string::npos);
  }

  TEST_CASE("outdoor cooling reason suggests the window") {
    auto s = test::snapshot(Timestamp::at(0, Weekday::Monday, 12), true, {kAc});
    s.indoor_temp = 26.0;
    s.outdoor_temp = 24.0;
    const auto fact = savings(Duration{3600}, FactType::Eco, Projection::Actual);
    const auto msg = compose_message(rec_for(ReasonKind::OutdoorCoolingAvailable, ScenarioMode::Explainable), s, fact,
                                     ScenarioMode::Explainable);
    REQUIRE(msg.reason);
    CHECK(msg.reason->find("window") != std::string::npos);
    CHECK(msg.reason->find("24.0") != std::string::npos);
    CHECK(msg.fact->unit == "kg CO2");
    CHECK(msg.fact->text.find("kWh") != std::string::npos);
    CHECK(msg.fact->text.find("CO2") != std::string::npos);
  }

  TEST_CASE("persuasive message carries the fact only") {
    const auto s = test::snapshot(Timestamp::at(0, Weekday::Monday, 12), true, {kAc});
    const auto fact = savings(Duration{3600}, FactType::Econ, Projection::Actual);
    const auto msg =
        compose_message(rec_for(ReasonKind::UserAway, ScenarioMode::Persuasive), s, fact, ScenarioMode::Persuasive);
    CHECK_FALSE(msg.context);
    CHECK_FALSE(msg.reason);
    CHECK(msg.fact);
    CHECK(message_conforms(msg, ScenarioMode::Persuasive));
  }

  TEST_CASE("mode and fact mismatch") {
    const auto s = test::snapshot(Timestamp::at(0, Weekday::Monday, 12), true, {kAc});
    const auto fact = savings(Duration{3600}, FactType::Econ, Projection::Actual);
    CHECK_THROWS_AS(compose_message(rec_for(ReasonKind::UserAway, ScenarioMode::Plain), s, fact, ScenarioMode::Plain),
                    ValidationError);
    CHECK_THROWS_AS(compose_message(rec_for(ReasonKind::UserAway, ScenarioMode::Explainable), s, std::nullopt,
                                    ScenarioMode::Explainable),
                    ValidationError);
  }

  TEST_CASE("shipped template file matches the built-in templates") {
    const auto file = load_templates(test::data_file("templates/messages.json"));
    CHECK(Json(file) == Json(MessageTemplates::defaults()));
  }

  TEST_CASE("message json round-trips") {
    const auto s = test::snapshot(Timestamp::at(0, Weekday::Monday, 12), true, {kAc});
    const auto fact = savings(Duration{3600}, FactType::Eco, Projection::Actual);
    const auto msg = compose_message(rec_for(ReasonKind::OutdoorCoolingAvailable, ScenarioMode::Explainable), s, fact,
                                     ScenarioMode::Explainable);
    CHECK(Json(msg).get<RecommendationMessage>() == msg);
  }
}
