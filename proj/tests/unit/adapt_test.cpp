#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "eerec/adapt.hpp"

using namespace eerec;

namespace {

std::vector<ProfileEntry> history(int accepts, int rejects, int ignores, FactType f = FactType::Eco,
                                  Projection p = Projection::Actual) {
  std::vector<ProfileEntry> h;
  std::uint64_t id = 1;
  for (int i = 0; i < accepts; ++i) h.push_back({id++, f, p, Response::Accept});
  for (int i = 0; i < rejects; ++i) h.push_back({id++, f, p, Response::Reject});
  for (int i = 0; i < ignores; ++i) h.push_back({id++, f, p, Response::None});
  return h;
}

}  // namespace

TEST_SUITE("adapt") {
  TEST_CASE("accept adds the bonus to the shown type") {
    const auto p = update_profile({}, FactType::Eco, Projection::Actual, 1, Response::Accept);
    CHECK(p.w_eco == doctest::Approx(1.1));
    CHECK(p.w_econ == 1.0);
    REQUIRE(p.history.size() == 1);
    CHECK(p.history[0] == ProfileEntry{1, FactType::Eco, Projection::Actual, Response::Accept});
  }

  TEST_CASE("ignore leaves the weights alone") {
    const auto p = update_profile({}, FactType::Econ, Projection::Monthly, 2, Response::None);
    CHECK(p.w_eco == 1.0);
    CHECK(p.w_econ == 1.0);
    CHECK(p.history.size() == 1);
  }

  TEST_CASE("reject is floored") {
    PersuasionProfile start;
    start.w_eco = 0.15;
    const auto p = update_profile(start, FactType::Eco, Projection::Annual, 3, Response::Reject);
    CHECK(p.w_eco == 0.1);
    CHECK(p.w_econ == 1.0);
    const auto again = update_profile(p, FactType::Eco, Projection::Annual, 4, Response::Reject);
    CHECK(again.w_eco == 0.1);
  }

  TEST_CASE("custom step and floor") {
    const AdaptConfig cfg{0.25, 0.5};
    auto p = update_profile({}, FactType::Econ, Projection::Actual, 1, Response::Accept, cfg);
    CHECK(p.w_econ == 1.25);
    p = update_profile(p, FactType::Eco, Projection::Actual, 2, Response::Reject, cfg);
    p = update_profile(p, FactType::Eco, Projection::Actual, 3, Response::Reject, cfg);
    p = update_profile(p, FactType::Eco, Projection::Actual, 4, Response::Reject, cfg);
    CHECK(p.w_eco == 0.5);
  }

  TEST_CASE("acceptance ratios") {
    const auto s51 = acceptance_stats(history(51, 49, 0));
    CHECK(*s51.overall.ratio() == doctest::Approx(0.51));
    CHECK(*s51.overall.ignored_fraction() == 0.0);

    const auto none = acceptance_stats(history(0, 0, 5));
    CHECK_FALSE(none.overall.ratio().has_value());
    CHECK(*none.overall.ignored_fraction() == 1.0);

    const auto s70 = acceptance_stats(history(7, 3, 2, FactType::Econ, Projection::Monthly));
    const auto& cell = s70.cells.at({FactType::Econ, Projection::Monthly});
    CHECK(*cell.ratio() == doctest::Approx(0.70));
    CHECK(*cell.ignored_fraction() == doctest::Approx(2.0 / 12.0));
    CHECK(s70.cells.size() == 1);

    CHECK_FALSE(CellStats{}.ratio().has_value());
    CHECK_FALSE(CellStats{}.ignored_fraction().has_value());
  }

  TEST_CASE("stats are permutation invariant") {
    auto h = history(4, 3, 2, FactType::Eco, Projection::Monthly);
    auto more = history(2, 5, 1, FactType::Econ, Projection::Annual);
    h.insert(h.end(), more.begin(), more.end());
    const auto base = acceptance_stats(h);
    std::mt19937 gen(3);
    for (int i = 0; i < 20; ++i) {
      std::shuffle(h.begin(), h.end(), gen);
      const auto s = acceptance_stats(h);
      CHECK(s.cells == base.cells);
      CHECK(s.overall == base.overall);
    }
  }

  TEST_CASE("history csv export") {
    std::ostringstream out;
    write_history_csv(out, history(1, 1, 1, FactType::Econ, Projection::Annual));
    CHECK(out.str() ==
          "rec_id,fact_type,projection,response\n"
          "1,econ,annual,accept\n"
          "2,econ,annual,reject\n"
          "3,econ,annual,none\n");
  }

  TEST_CASE("profile json round-trips") {
    auto p = update_profile({}, FactType::Eco, Projection::Monthly, 9, Response::Accept);
    CHECK(Json(p).get<PersuasionProfile>() == p);
  }
}
