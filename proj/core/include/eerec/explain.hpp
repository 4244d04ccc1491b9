#pragma once

// Explainable message construction: savings facts, fact-type and projection
// selection, and template-based message composition.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eerec/adapt.hpp"
#include "eerec/json.hpp"
#include "eerec/recommendation.hpp"
#include "eerec/rng.hpp"

namespace eerec {

/// Electricity price and grid emission factor for one locale.
struct TariffPreset {
  std::string label;
  double tariff_eur_per_kwh = 0.165;
  double emission_kg_per_kwh = 0.3;

  bool operator==(const TariffPreset&) const = default;
};

/// Greek tariff of the worked A/C example (16.5 cents/kWh); the emission
/// factor is a configurable placeholder.
TariffPreset paper_example_preset();
/// Looks up a named preset ("paper-example"); throws NotFoundError.
TariffPreset tariff_preset(const std::string& name);

inline constexpr double kWeeksPerMonth = 52.0 / 12.0;
inline constexpr double kWeeksPerYear = 52.0;

/// Energy and Eco/Econ value of an appliance's usage.
///
/// Actual uses the time on since `on_since`; Monthly and Annual scale the
/// weekly habit hours by 52/12 and 52. With no habit hours a projection falls
/// back to Actual (`requested` keeps what was asked for). Values are unrounded.
/// Throws ValidationError if now < on_since or a factor is not positive.
PersuasiveFact compute_savings(const Appliance& appliance, Timestamp on_since, Timestamp now, double tariff_eur_per_kwh,
                               double emission_kg_per_kwh, double weekly_on_hours, FactType type,
                               Projection projection);

/// Eco with probability w_eco / (w_eco + w_econ), given u uniform in [0, 1).
FactType select_fact_type(const PersuasionProfile& profile, double u);
inline FactType select_fact_type(const PersuasionProfile& profile, Rng& rng) {
  return select_fact_type(profile, rng.uniform());
}

struct ProjectionPolicy {
  bool uniform = true;
  Projection fixed = Projection::Actual;

  static ProjectionPolicy uniform_random() { return {}; }
  static ProjectionPolicy constant(Projection p) { return {false, p}; }

  bool operator==(const ProjectionPolicy&) const = default;
};

/// Uniform policy consumes exactly one draw; fixed consumes none.
Projection select_projection(const ProjectionPolicy& policy, Rng& rng);
/// Same selection from an already drawn u in [0, 1).
Projection select_projection(const ProjectionPolicy& policy, double u);

/// Rounds half away from zero to 2 decimals, for display.
double round_display(double v);
std::string format_amount(double v);

struct MessageTemplates {
  std::string prompt;
  std::vector<std::string> options;
  std::map<ApplianceKind, std::string> appliance_names;
  std::map<ReasonKind, std::string> reasons;
  std::map<FactType, std::map<Projection, std::string>> facts;

  /// Built-in English templates; the same text ships in data/templates/messages.json.
  static const MessageTemplates& defaults();
};

MessageTemplates load_templates(const std::string& path);

struct ContextBlock {
  double indoor_temp = 0.0;
  double outdoor_temp = 0.0;
  double indoor_lux = 0.0;
  double outdoor_lux = 0.0;
  bool occupied = false;

  bool operator==(const ContextBlock&) const = default;
};

struct FactSection {
  FactType type = FactType::Econ;
  Projection projection = Projection::Actual;
  double energy_kwh = 0.0;
  double value = 0.0;
  std::string unit;  // "EUR" or "kg CO2"
  std::string text;

  bool operator==(const FactSection&) const = default;
};

/// Up to three sections: context block, verbal reason, persuasive fact.
/// The timestamp, prompt and options are always present.
struct RecommendationMessage {
  std::uint64_t rec_id = 0;
  ScenarioMode mode = ScenarioMode::Plain;
  Timestamp time;
  std::string timestamp;
  std::string prompt;
  std::vector<std::string> options;
  std::optional<ContextBlock> context;
  std::optional<std::string> reason;
  std::optional<FactSection> fact;

  bool operator==(const RecommendationMessage&) const = default;
};

/// Assembles the sections `mode` allows. Throws ValidationError when a fact
/// is given in Plain mode or missing in the other modes.
RecommendationMessage compose_message(const Recommendation& rec, const ContextSnapshot& snapshot,
                                      const std::optional<PersuasiveFact>& fact, ScenarioMode mode,
                                      const MessageTemplates& templates = MessageTemplates::defaults());

/// Plain: no context/reason/fact; Persuasive: fact only; Explainable: all three.
bool message_conforms(const RecommendationMessage& msg, ScenarioMode mode);

std::string render_text(const RecommendationMessage& msg);

void to_json(Json& j, const TariffPreset& p);
void from_json(const Json& j, TariffPreset& p);
void to_json(Json& j, const ProjectionPolicy& p);
void from_json(const Json& j, ProjectionPolicy& p);
void to_json(Json& j, const MessageTemplates& t);
void from_json(const Json& j, MessageTemplates& t);
void to_json(Json& j, const RecommendationMessage& m);
void from_json(const Json& j, RecommendationMessage& m);

}  // namespace eerec
