#include "eerec/adapt.hpp"

#include <algorithm>
#include <ostream>

namespace eerec {

PersuasionProfile update_profile(PersuasionProfile profile, FactType shown, Projection projection,
                                 std::uint64_t rec_id, Response response, const AdaptConfig& cfg) {
  double& w = shown == FactType::Eco ? profile.w_eco : profile.w_econ;
  switch (response) {
    case Response::Accept:
      w += cfg.beta;
      break;
    case Response::Reject:
      w = std::max(cfg.w_min, w - cfg.beta);
      break;
    case Response::None:
      break;
  }
  profile.history.push_back({rec_id, shown, projection, response});
  return profile;
}

std::optional<double> CellStats::ratio() const {
  const auto answered = accepted + rejected;
  if (answered == 0) return std::nullopt;
  return static_cast<double>(accepted) / static_cast<double>(answered);
}

std::optional<double> CellStats::ignored_fraction() const {
  if (total() == 0) return std::nullopt;
  return static_cast<double>(ignored) / static_cast<double>(total());
}

void CellStats::add(Response r) {
  switch (r) {
    case Response::Accept: ++accepted; break;
    case Response::Reject: ++rejected; break;
    case Response::None: ++ignored; break;
  }
}

CellStats& CellStats::operator+=(const CellStats& o) {
  accepted += o.accepted;
  rejected += o.rejected;
  ignored += o.ignored;
  return *this;
}

AcceptanceStats acceptance_stats(std::span<const ProfileEntry> history) {
  AcceptanceStats s;
  for (const auto& e : history) {
    s.cells[{e.fact, e.projection}].add(e.response);
    s.overall.add(e.response);
  }
  return s;
}

void write_history_csv(std::ostream& out, std::span<const ProfileEntry> history) {
  out << "rec_id,fact_type,projection,response\n";
  for (const auto& e : history)
    out << e.rec_id << ',' << to_string(e.fact) << ',' << to_string(e.projection) << ',' << to_string(e.response)
        << '\n';
}

void to_json(Json& j, const ProfileEntry& e) {
  j = Json{{"rec_id", e.rec_id}, {"fact_type", e.fact}, {"projection", e.projection}, {"response", e.response}};
}

void from_json(const Json& j, ProfileEntry& e) {
  e.rec_id = j.at("rec_id").get<std::uint64_t>();
  e.fact = j.at("fact_type").get<FactType>();
  e.projection = j.at("projection").get<Projection>();
  e.response = j.at("response").get<Response>();
}

void to_json(Json& j, const PersuasionProfile& p) {
  j = Json{{"w_eco", p.w_eco}, {"w_econ", p.w_econ}, {"history", p.history}};
}

void from_json(const Json& j, PersuasionProfile& p) {
  p.w_eco = j.at("w_eco").get<double>();
  p.w_econ = j.at("w_econ").get<double>();
  if (!(p.w_eco > 0.0) || !(p.w_econ > 0.0)) throw ValidationError("persuasion weights must be > 0");
  p.history = j.value("history", std::vector<ProfileEntry>{});
}

void to_json(Json& j, const AdaptConfig& c) { j = Json{{"beta", c.beta}, {"w_min", c.w_min}}; }

void from_json(const Json& j, AdaptConfig& c) {
  c.beta = j.value("beta", 0.1);
  c.w_min = j.value("w_min", 0.1);
  if (!(c.w_min > 0.0)) throw ValidationError("w_min must be > 0");
}

}  // namespace eerec
