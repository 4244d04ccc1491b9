#include "eerec/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "eerec/errors.hpp"
#include "eerec/session.hpp"

namespace eerec {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::optional<double> fraction(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json cell_json(const CellStats& c) {
  return Json{{"accepted", c.accepted},
              {"rejected", c.rejected},
              {"ignored", c.ignored},
              {"ratio", opt_json(c.ratio())},
              {"ignored_fraction", opt_json(c.ignored_fraction())}};
}

std::string fmt(const std::optional<double>& v, int precision = 4) {
  if (!v) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

std::string cell_name(const FactCell& c) {
  return std::string(to_string(c.first)) + "/" + std::string(to_string(c.second));
}

}  // namespace

SessionSummary summarize(std::span<const SessionEvent> events) {
  SessionSummary s;
  bool started = false;
  std::map<std::uint64_t, bool> open;
  for (const auto& e : events) {
    if (const auto* p = std::get_if<SessionStarted>(&e.payload)) {
      started = true;
      s.session_id = p->setup.session_id;
      s.user = p->setup.user;
      s.mode = p->setup.mode;
      s.config_hash = hash_hex(fnv1a(Json(p->setup.engine).dump()));
    } else if (const auto* p = std::get_if<RecommendationIssued>(&e.payload)) {
      ++s.issued;
      open[p->rec.id] = true;
    } else if (const auto* p = std::get_if<ResponseRecorded>(&e.payload)) {
      s.overall.add(p->response);
      open.erase(p->rec_id);
    } else if (const auto* p = std::get_if<ProfileUpdated>(&e.payload)) {
      s.cells[{p->fact, p->projection}].add(p->response);
    }
  }
  if (!started) throw ValidationError("log has no session_started event");
  s.ceased = static_cast<std::int64_t>(open.size());
  return s;
}

MetricsReport report_metrics(std::span<const SessionSummary> summaries, bool force) {
  if (summaries.empty()) throw ValidationError("report needs at least one session log");
  MetricsReport r;
  r.config_hash = summaries.front().config_hash;
  for (const auto& s : summaries) {
    if (s.config_hash != r.config_hash) r.mixed_configs = true;
  }
  if (r.mixed_configs && !force)
    throw ValidationError("logs come from different engine configurations (use --force to combine them)");

  std::map<ScenarioMode, std::map<std::string, CellStats>> per_user;
  for (const auto& s : summaries) {
    ++r.sessions;
    r.issued += s.issued;
    r.ignored += s.overall.ignored;
    auto& m = r.modes[s.mode];
    ++m.sessions;
    m.pooled += s.overall;
    per_user[s.mode][s.user] += s.overall;
    if (s.mode == ScenarioMode::Plain) continue;
    for (const auto& [cell, stats] : s.cells) {
      r.heatmap[cell] += stats;
      r.projections[cell.second] += stats;
    }
  }
  r.ignored_fraction = fraction(r.ignored, r.issued);

  for (auto& [mode, m] : r.modes) {
    std::vector<double> ratios;
    for (const auto& [user, stats] : per_user[mode])
      if (auto v = stats.ratio()) ratios.push_back(*v);
    m.users = static_cast<std::int64_t>(ratios.size());
    if (ratios.empty()) continue;
    double sum = 0.0;
    for (double v : ratios) sum += v;
    const double mean = sum / static_cast<double>(ratios.size());
    double ss = 0.0;
    for (double v : ratios) ss += (v - mean) * (v - mean);
    m.mean_ratio = mean;
    m.stdev_ratio = std::sqrt(ss / static_cast<double>(ratios.size()));
  }
  return r;
}

void write_report_text(std::ostream& out, const MetricsReport& r) {
  out << "sessions " << r.sessions << ", recommendations issued " << r.issued << ", ignored " << r.ignored;
  if (r.ignored_fraction) out << " (" << fmt(r.ignored_fraction) << ")";
  out << "\n";
  if (r.mixed_configs) out << "warning: logs come from different engine configurations\n";

  out << "\n" << std::left << std::setw(14) << "mode" << std::right << std::setw(9) << "sessions" << std::setw(7)
      << "users" << std::setw(10) << "accepted" << std::setw(10) << "rejected" << std::setw(9) << "ignored"
      << std::setw(9) << "mean" << std::setw(9) << "stdev" << "\n";
  for (const auto& [mode, m] : r.modes) {
    out << std::left << std::setw(14) << to_string(mode) << std::right << std::setw(9) << m.sessions << std::setw(7)
        << m.users << std::setw(10) << m.pooled.accepted << std::setw(10) << m.pooled.rejected << std::setw(9)
        << m.pooled.ignored << std::setw(9) << fmt(m.mean_ratio, 2) << std::setw(9) << fmt(m.stdev_ratio, 2) << "\n";
  }

  if (!r.projections.empty()) {
    out << "\n" << std::left << std::setw(14) << "projection" << std::right << std::setw(10) << "accepted"
        << std::setw(10) << "rejected" << std::setw(9) << "ignored" << std::setw(9) << "ratio" << "\n";
    for (const auto& [p, c] : r.projections)
      out << std::left << std::setw(14) << to_string(p) << std::right << std::setw(10) << c.accepted << std::setw(10)
          << c.rejected << std::setw(9) << c.ignored << std::setw(9) << fmt(c.ratio(), 2) << "\n";
  }

  if (!r.heatmap.empty()) {
    out << "\n" << std::left << std::setw(8) << "ratio";
    for (auto p : kAllProjections) out << std::right << std::setw(9) << to_string(p);
    out << "\n";
    for (auto f : kAllFactTypes) {
      out << std::left << std::setw(8) << to_string(f);
      for (auto p : kAllProjections) {
        auto it = r.heatmap.find({f, p});
        out << std::right << std::setw(9) << (it == r.heatmap.end() ? std::string("-") : fmt(it->second.ratio(), 2));
      }
      out << "\n";
    }
  }
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  out << "group,key,sessions,users,accepted,rejected,ignored,ratio,stdev,ignored_fraction\n";
  auto row = [&](std::string_view group, const std::string& key, std::optional<std::int64_t> sessions,
                 std::optional<std::int64_t> users, const CellStats& c, const std::optional<double>& ratio,
                 const std::optional<double>& stdev) {
    out << group << ',' << key << ',' << (sessions ? std::to_string(*sessions) : "") << ','
        << (users ? std::to_string(*users) : "") << ',' << c.accepted << ',' << c.rejected << ',' << c.ignored << ','
        << fmt(ratio, 6) << ',' << fmt(stdev, 6) << ',' << fmt(c.ignored_fraction(), 6) << '\n';
  };
  for (const auto& [mode, m] : r.modes)
    row("mode", std::string(to_string(mode)), m.sessions, m.users, m.pooled, m.mean_ratio, m.stdev_ratio);
  for (const auto& [p, c] : r.projections) row("projection", std::string(to_string(p)), {}, {}, c, c.ratio(), {});
  for (const auto& [cell, c] : r.heatmap) row("cell", cell_name(cell), {}, {}, c, c.ratio(), {});
  CellStats all;
  for (const auto& [mode, m] : r.modes) all += m.pooled;
  out << "overall,all," << r.sessions << ",," << all.accepted << ',' << all.rejected << ',' << all.ignored << ','
      << fmt(all.ratio(), 6) << ",," << fmt(r.ignored_fraction, 6) << '\n';
}

void to_json(Json& j, const SessionSummary& s) {
  Json cells = Json::array();
  for (const auto& [cell, c] : s.cells) {
    Json entry = cell_json(c);
    entry["fact_type"] = cell.first;
    entry["projection"] = cell.second;
    cells.push_back(entry);
  }
  j = Json{{"session_id", s.session_id}, {"user", s.user},       {"mode", s.mode},
           {"config_hash", s.config_hash}, {"issued", s.issued}, {"ceased", s.ceased},
           {"overall", cell_json(s.overall)}, {"cells", cells}};
}

void to_json(Json& j, const ModeMetrics& m) {
  j = Json{{"sessions", m.sessions},
           {"users", m.users},
           {"pooled", cell_json(m.pooled)},
           {"mean_ratio", opt_json(m.mean_ratio)},
           {"stdev_ratio", opt_json(m.stdev_ratio)}};
}

void to_json(Json& j, const MetricsReport& r) {
  Json modes = Json::object();
  for (const auto& [mode, m] : r.modes) modes[std::string(to_string(mode))] = m;
  Json projections = Json::object();
  for (const auto& [p, c] : r.projections) projections[std::string(to_string(p))] = cell_json(c);
  Json heatmap = Json::array();
  for (const auto& [cell, c] : r.heatmap) {
    Json entry = cell_json(c);
    entry["fact_type"] = cell.first;
    entry["projection"] = cell.second;
    heatmap.push_back(entry);
  }
  j = Json{{"v", 1},
           {"config_hash", r.config_hash},
           {"mixed_configs", r.mixed_configs},
           {"sessions", r.sessions},
           {"issued", r.issued},
           {"ignored", r.ignored},
           {"ignored_fraction", opt_json(r.ignored_fraction)},
           {"modes", modes},
           {"projections", projections},
           {"heatmap", heatmap}};
}

}  // namespace eerec
