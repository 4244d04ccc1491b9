#pragma once

// Acceptance metrics over finished session logs.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eerec/event.hpp"

namespace eerec {

/// Counts extracted from one session log.
struct SessionSummary {
  std::string session_id;
  std::string user;
  ScenarioMode mode = ScenarioMode::Plain;
  /// Hash of the engine configuration; logs are only comparable when equal.
  std::string config_hash;
  std::int64_t issued = 0;
  /// Still pending when the session ended.
  std::int64_t ceased = 0;
  CellStats overall;
  std::map<FactCell, CellStats> cells;
};

/// Throws ValidationError if the log has no session_started event.
SessionSummary summarize(std::span<const SessionEvent> events);

struct ModeMetrics {
  std::int64_t sessions = 0;
  /// Users with at least one answered recommendation.
  std::int64_t users = 0;
  CellStats pooled;
  /// Mean and population standard deviation of the per-user ratios.
  std::optional<double> mean_ratio;
  std::optional<double> stdev_ratio;
};

struct MetricsReport {
  std::string config_hash;
  bool mixed_configs = false;
  std::int64_t sessions = 0;
  std::int64_t issued = 0;
  std::int64_t ignored = 0;
  /// ignored / issued
  std::optional<double> ignored_fraction;
  std::map<ScenarioMode, ModeMetrics> modes;
  /// Fact sessions only (Persuasive and Explainable).
  std::map<Projection, CellStats> projections;
  std::map<FactCell, CellStats> heatmap;
};

/// Throws ValidationError when `summaries` is empty, or when the logs come
/// from different engine configurations and `force` is false.
MetricsReport report_metrics(std::span<const SessionSummary> summaries, bool force = false);

void write_report_text(std::ostream& out, const MetricsReport& r);
/// One row per aggregate: group,key,sessions,users,accepted,rejected,ignored,ratio,stdev,ignored_fraction
void write_report_csv(std::ostream& out, const MetricsReport& r);

void to_json(Json& j, const SessionSummary& s);
void to_json(Json& j, const ModeMetrics& m);
void to_json(Json& j, const MetricsReport& r);

}  // namespace eerec
