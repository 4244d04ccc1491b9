#include "eerec/knowledge.hpp"

#include <algorithm>
#include <cmath>

namespace eerec {

bool cooling_available(const ContextSnapshot& s, const Thresholds& th) {
  return s.outdoor_temp <= s.indoor_temp - th.delta_t;
}

bool natural_light_available(const ContextSnapshot& s, const Thresholds& th) {
  return s.outdoor_lux >= th.natural_light_lux;
}

std::optional<double> SlotAggregate::mean(SensorKind kind, Placement placement) const {
  auto it = sums.find({kind, placement});
  if (it == sums.end() || it->second.second == 0) return std::nullopt;
  return it->second.first / static_cast<double>(it->second.second);
}

void AggregateSet::add(const SensorReading& r) {
  if (!in_range(r)) {
    ++rejects_;
    return;
  }
  const SlotKey key = slot_key(r.time);
  auto& cell = cells_[key];
  cell.key = key;
  const auto week = r.time.week();
  cell.observed_weeks.insert(week);
  if (r.kind == SensorKind::Motion && r.value == 1.0) cell.present_weeks.insert(week);
  auto& [sum, count] = cell.sums[{r.kind, r.placement}];
  sum += r.value;
  ++count;
}

void AggregateSet::merge(const AggregateSet& other) {
  for (const auto& [key, theirs] : other.cells_) {
    auto& mine = cells_[key];
    mine.key = key;
    mine.observed_weeks.insert(theirs.observed_weeks.begin(), theirs.observed_weeks.end());
    mine.present_weeks.insert(theirs.present_weeks.begin(), theirs.present_weeks.end());
    for (const auto& [k, sc] : theirs.sums) {
      auto& [sum, count] = mine.sums[k];
      sum += sc.first;
      count += sc.second;
    }
  }
  rejects_ += other.rejects_;
}

const SlotAggregate* AggregateSet::find(SlotKey key) const {
  auto it = cells_.find(key);
  return it == cells_.end() ? nullptr : &it->second;
}

AggregateSet aggregate(std::span<const SensorReading> readings) {
  AggregateSet set;
  for (const auto& r : readings) set.add(r);
  return set;
}

OccupancyProfile occupancy_profile(const AggregateSet& aggregates, int window_weeks) {
  if (aggregates.empty()) throw ValidationError("insufficient history");
  OccupancyProfile prof;
  prof.window_weeks = window_weeks;
  for (const auto& [key, cell] : aggregates.cells()) {
    const int obs = cell.observation_count();
    prof.p[static_cast<int>(key.day)][key.slot] =
        obs == 0 ? 0.0 : static_cast<double>(cell.presence_count()) / static_cast<double>(obs);
  }
  return prof;
}

std::map<ApplianceId, ApplianceHistory> appliance_histories(std::span<const SensorReading> readings) {
  std::map<ApplianceId, ApplianceHistory> out;
  std::map<ApplianceId, bool> state;
  for (const auto& r : readings) {
    if (r.kind != SensorKind::DevicePower || !in_range(r)) continue;
    auto& h = out[r.sensor];
    const bool on = r.value > 0.0;
    auto [it, fresh] = state.try_emplace(r.sensor, false);
    if (on != it->second) {
      h.transitions.push_back({r.time, on});
      it->second = on;
    }
    h.end = std::max(h.end, r.time);
  }
  return out;
}

double HabitProfile::weekly_on_hours(const ApplianceId& id) const {
  auto it = appliances.find(id);
  return it == appliances.end() ? 0.0 : it->second.weekly_on_hours;
}

HabitProfile habit_profile(const AggregateSet& aggregates, const std::map<ApplianceId, ApplianceHistory>& histories,
                           int weeks, double typical_fraction) {
  HabitProfile prof;
  for (const auto& [id, hist] : histories) {
    ApplianceHabit habit;
    std::int64_t on_seconds = 0;
    std::optional<Timestamp> on_start;
    std::map<SlotKey, std::set<std::int64_t>> on_weeks;
    double temp_sum = 0.0;
    int temp_count = 0;
    for (const auto& tr : hist.transitions) {
      if (tr.on) {
        if (!on_start) on_start = tr.time;
        on_weeks[slot_key(tr.time)].insert(tr.time.week());
        if (const auto* cell = aggregates.find(slot_key(tr.time))) {
          if (auto t = cell->mean(SensorKind::Temperature, Placement::Outdoor)) {
            temp_sum += *t;
            ++temp_count;
          }
        }
      } else if (on_start) {
        on_seconds += (tr.time - *on_start).count();
        on_start.reset();
      }
    }
    if (on_start && hist.end > *on_start) on_seconds += (hist.end - *on_start).count();

    if (weeks > 0) {
      habit.weekly_on_hours = static_cast<double>(on_seconds) / 3600.0 / weeks;
      for (const auto& [key, ws] : on_weeks)
        if (static_cast<double>(ws.size()) >= typical_fraction * weeks) habit.typical_on_slots.push_back(key);
    }
    if (temp_count > 0) habit.outdoor_temp_at_on = temp_sum / temp_count;
    prof.appliances.emplace(id, std::move(habit));
  }
  return prof;
}

std::string_view to_string(MicroMomentKind k) {
  switch (k) {
    case MicroMomentKind::UserExit: return "user_exit";
    case MicroMomentKind::UserEnter: return "user_enter";
    case MicroMomentKind::DeviceOnExtended: return "device_on_extended";
    case MicroMomentKind::ContextFavorable: return "context_favorable";
  }
  return "?";
}

std::vector<MicroMoment> detect_micro_moments(const std::optional<ContextSnapshot>& current,
                                              const std::optional<ContextSnapshot>& previous,
                                              const Thresholds& th) {
  std::vector<MicroMoment> out;
  if (!current || !previous) return out;
  const auto& cur = *current;
  const auto& prev = *previous;
  auto emit = [&](MicroMomentKind kind, std::optional<ApplianceId> appliance = {},
                  std::optional<ReasonKind> favorable = {}) {
    out.push_back({cur.time, kind, std::move(appliance), favorable, cur});
  };

  const bool was_away = prev.absent_for >= th.absence;
  const bool is_away = cur.absent_for >= th.absence;
  if (!was_away && is_away) emit(MicroMomentKind::UserExit);
  if (was_away && !is_away) emit(MicroMomentKind::UserEnter);

  for (const auto& a : cur.appliances) {
    if (!a.on) continue;
    const auto on_for = cur.time - a.last_toggle;
    Duration prev_on_for{0};
    if (const auto* pa = prev.find(a.id); pa && pa->on && pa->last_toggle == a.last_toggle)
      prev_on_for = prev.time - a.last_toggle;
    if (prev_on_for < th.extended_use && on_for >= th.extended_use)
      emit(MicroMomentKind::DeviceOnExtended, a.id);
  }

  if (!cooling_available(prev, th) && cooling_available(cur, th))
    emit(MicroMomentKind::ContextFavorable, {}, ReasonKind::OutdoorCoolingAvailable);
  if (!natural_light_available(prev, th) && natural_light_available(cur, th))
    emit(MicroMomentKind::ContextFavorable, {}, ReasonKind::NaturalLightAvailable);
  return out;
}

KnowledgeBase build_knowledge(std::span<const SensorReading> readings, int window_weeks, const Thresholds& thresholds) {
  if (window_weeks < 1) throw ValidationError("window must be at least 1 week");
  std::int64_t last_week = 0;
  for (const auto& r : readings) last_week = std::max(last_week, r.time.week());
  const std::int64_t first_week = last_week - window_weeks + 1;

  std::vector<SensorReading> window;
  std::set<std::int64_t> weeks;
  for (const auto& r : readings) {
    if (r.time.week() < first_week) continue;
    window.push_back(r);
    weeks.insert(r.time.week());
  }
  const auto aggregates = aggregate(window);
  const int effective_weeks = static_cast<int>(weeks.size());

  KnowledgeBase kb;
  kb.occupancy = occupancy_profile(aggregates, effective_weeks);
  kb.habits = habit_profile(aggregates, appliance_histories(window), effective_weeks);
  kb.thresholds = thresholds;
  kb.window_weeks = window_weeks;
  kb.rejected_readings = aggregates.rejects();
  kb.generated_at = window.empty() ? Timestamp{} : window.back().time;
  for (const auto& r : window) kb.generated_at = std::max(kb.generated_at, r.time);
  return kb;
}

void to_json(Json& j, const Thresholds& t) {
  j = Json{{"absence_s", t.absence.count()},
           {"extended_use_s", t.extended_use.count()},
           {"delta_t", t.delta_t},
           {"natural_light_lux", t.natural_light_lux}};
}

void from_json(const Json& j, Thresholds& t) {
  t = Thresholds{};
  t.absence = seconds_field(j, "absence_s", t.absence);
  t.extended_use = seconds_field(j, "extended_use_s", t.extended_use);
  t.delta_t = j.value("delta_t", t.delta_t);
  t.natural_light_lux = j.value("natural_light_lux", t.natural_light_lux);
}

void to_json(Json& j, const HabitProfile& h) {
  j = Json::object();
  for (const auto& [id, habit] : h.appliances) {
    Json slots = Json::array();
    for (const auto& k : habit.typical_on_slots) slots.push_back({{"day", static_cast<int>(k.day)}, {"slot", k.slot}});
    Json entry{{"weekly_on_hours", habit.weekly_on_hours}, {"typical_on_slots", slots}};
    if (habit.outdoor_temp_at_on) entry["outdoor_temp_at_on"] = *habit.outdoor_temp_at_on;
    j[id] = entry;
  }
}

void from_json(const Json& j, HabitProfile& h) {
  h.appliances.clear();
  for (const auto& [id, entry] : j.items()) {
    ApplianceHabit habit;
    habit.weekly_on_hours = entry.at("weekly_on_hours").get<double>();
    if (habit.weekly_on_hours < 0.0 || habit.weekly_on_hours > 168.0)
      throw ValidationError("weekly_on_hours out of [0,168] for " + id);
    for (const auto& s : entry.value("typical_on_slots", Json::array()))
      habit.typical_on_slots.push_back({static_cast<Weekday>(s.at("day").get<int>()), s.at("slot").get<int>()});
    if (entry.contains("outdoor_temp_at_on")) habit.outdoor_temp_at_on = entry["outdoor_temp_at_on"].get<double>();
    h.appliances.emplace(id, std::move(habit));
  }
}

void to_json(Json& j, const OccupancyProfile& p) {
  j = Json{{"window_weeks", p.window_weeks}, {"p", p.p}};
}

void from_json(const Json& j, OccupancyProfile& p) {
  p.window_weeks = j.value("window_weeks", 0);
  const auto& rows = j.at("p");
  if (rows.size() != kDaysPerWeek) throw ValidationError("occupancy profile needs 7 day rows");
  for (int d = 0; d < kDaysPerWeek; ++d) {
    if (rows[d].size() != kSlotsPerDay) throw ValidationError("occupancy profile rows need 288 slots");
    for (int s = 0; s < kSlotsPerDay; ++s) {
      const double v = rows[d][s].get<double>();
      if (v < 0.0 || v > 1.0) throw ValidationError("occupancy probability outside [0,1]");
      p.p[d][s] = v;
    }
  }
}

void to_json(Json& j, const KnowledgeBase& kb) {
  j = Json{{"v", 1},
           {"generated_at", kb.generated_at},
           {"window_weeks", kb.window_weeks},
           {"thresholds", kb.thresholds},
           {"occupancy", kb.occupancy},
           {"habits", kb.habits},
           {"profile", kb.profile},
           {"rejected_readings", kb.rejected_readings}};
}

void from_json(const Json& j, KnowledgeBase& kb) {
  if (j.value("v", 1) != 1) throw ValidationError("unsupported knowledge-base version");
  kb.generated_at = j.value("generated_at", Timestamp{});
  kb.window_weeks = j.value("window_weeks", 3);
  kb.thresholds = j.value("thresholds", Thresholds{});
  kb.occupancy = j.at("occupancy").get<OccupancyProfile>();
  kb.habits = j.value("habits", HabitProfile{});
  kb.profile = j.value("profile", PersuasionProfile{});
  kb.rejected_readings = j.value("rejected_readings", std::size_t{0});
}

}  // namespace eerec
