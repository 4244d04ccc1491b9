#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eerec/json.hpp"
#include "eerec/model.hpp"

namespace eerec {

struct ProfileEntry {
  std::uint64_t rec_id = 0;
  FactType fact = FactType::Eco;
  Projection projection = Projection::Actual;
  Response response = Response::None;

  bool operator==(const ProfileEntry&) const = default;
};

/// Per-user Eco/Econ preference. Both weights start equal and stay >= w_min.
struct PersuasionProfile {
  double w_eco = 1.0;
  double w_econ = 1.0;
  std::vector<ProfileEntry> history;

  /// Probability that the next fact shown is an Eco fact.
  double p_eco() const { return w_eco / (w_eco + w_econ); }

  bool operator==(const PersuasionProfile&) const = default;
};

struct AdaptConfig {
  double beta = 0.1;   // bonus/penalty step
  double w_min = 0.1;  // weight floor

  bool operator==(const AdaptConfig&) const = default;
};

/// Bonus on accept, penalty (floored) on reject, unchanged on ignore.
/// The response is appended to the history in every case.
PersuasionProfile update_profile(PersuasionProfile profile, FactType shown, Projection projection,
                                 std::uint64_t rec_id, Response response, const AdaptConfig& cfg = {});

struct CellStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t ignored = 0;

  std::int64_t total() const { return accepted + rejected + ignored; }
  /// accepted / (accepted + rejected); absent when nothing was answered.
  std::optional<double> ratio() const;
  std::optional<double> ignored_fraction() const;
  void add(Response r);
  CellStats& operator+=(const CellStats& o);

  bool operator==(const CellStats&) const = default;
};

using FactCell = std::pair<FactType, Projection>;

struct AcceptanceStats {
  std::map<FactCell, CellStats> cells;
  CellStats overall;
};

AcceptanceStats acceptance_stats(std::span<const ProfileEntry> history);

/// rec_id,fact_type,projection,response
void write_history_csv(std::ostream& out, std::span<const ProfileEntry> history);

void to_json(Json& j, const ProfileEntry& e);
void from_json(const Json& j, ProfileEntry& e);
void to_json(Json& j, const PersuasionProfile& p);
void from_json(const Json& j, PersuasionProfile& p);
void to_json(Json& j, const AdaptConfig& c);
void from_json(const Json& j, AdaptConfig& c);

}  // namespace eerec
