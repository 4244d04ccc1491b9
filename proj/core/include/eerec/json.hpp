#pragma once

// JSON bindings for the shared domain types. Module-specific records declare
// their own to_json/from_json next to their definitions.

#include <nlohmann/json.hpp>

#include "eerec/model.hpp"

namespace eerec {

using Json = nlohmann::json;

void to_json(Json& j, Timestamp t);
void from_json(const Json& j, Timestamp& t);

#define EEREC_DECLARE_ENUM_JSON(E)    \
  void to_json(Json& j, E v);         \
  void from_json(const Json& j, E& v);

EEREC_DECLARE_ENUM_JSON(SensorKind)
EEREC_DECLARE_ENUM_JSON(Placement)
EEREC_DECLARE_ENUM_JSON(ApplianceKind)
EEREC_DECLARE_ENUM_JSON(ReasonKind)
EEREC_DECLARE_ENUM_JSON(ScenarioMode)
EEREC_DECLARE_ENUM_JSON(FactType)
EEREC_DECLARE_ENUM_JSON(Projection)
EEREC_DECLARE_ENUM_JSON(Response)
EEREC_DECLARE_ENUM_JSON(Lifecycle)

#undef EEREC_DECLARE_ENUM_JSON

void to_json(Json& j, const SensorReading& r);
void from_json(const Json& j, SensorReading& r);
void to_json(Json& j, const Appliance& a);
void from_json(const Json& j, Appliance& a);
void to_json(Json& j, const ContextSnapshot& s);
void from_json(const Json& j, ContextSnapshot& s);
void to_json(Json& j, const ContextTracker& t);

/// Durations are stored as integer seconds.
inline Duration seconds_field(const Json& j, const char* key, Duration fallback) {
  return j.contains(key) ? Duration{j.at(key).get<std::int64_t>()} : fallback;
}

/// Reads a JSON Lines stream. Blank lines are skipped; a malformed line throws
/// ParseError carrying its 1-based line number.
template <typename F>
void for_each_json_line(std::istream& in, F&& fn);

/// Reads a whole JSON document from disk, throwing ParseError on failure.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

std::vector<SensorReading> read_readings_jsonl(std::istream& in);
void write_readings_jsonl(std::ostream& out, const std::vector<SensorReading>& readings);

}  // namespace eerec

#include <istream>
#include <string>

#include "eerec/errors.hpp"

namespace eerec {

template <typename F>
void for_each_json_line(std::istream& in, F&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(e.what(), number);
    }
    try {
      fn(j, number);
    } catch (const ParseError&) {
      throw;
    } catch (const Json::exception& e) {
      throw ParseError(e.what(), number);
    } catch (const Error& e) {
      throw ParseError(e.what(), number);
    }
  }
}

}  // namespace eerec
