#pragma once

// Discrete-event office simulator: scenario and persona files, the indoor
// dynamics, the building/user world, and the session driver shared by batch
// runs and live sessions.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eerec/rng.hpp"
#include "eerec/session.hpp"

namespace eerec {

/// Hour-level presence grid per weekday.
struct OccupancySchedule {
  int start_hour = 8;
  int end_hour = 22;
  /// present[day][hour]; only hours in [start_hour, end_hour) are meaningful.
  std::array<std::array<bool, 24>, kDaysPerWeek> present{};
  /// Days the office is simulated (Mon..Fri by default).
  std::vector<Weekday> days;

  bool at(Timestamp t) const;
  bool operator==(const OccupancySchedule&) const = default;
};

struct WeatherProfile {
  enum class Model { Sinusoid, Table };
  Model model = Model::Sinusoid;

  double temp_mean = 25.0;
  double temp_amplitude = 8.0;
  double temp_peak_hour = 14.0;
  double lux_peak = 60000.0;
  double sunrise_hour = 6.0;
  double sunset_hour = 20.5;

  /// Table model: samples every step_min minutes from start_hour, per day,
  /// linearly interpolated in between.
  int step_min = 60;
  int start_hour = 8;
  std::map<Weekday, std::vector<double>> temperature;
  std::map<Weekday, std::vector<double>> luminosity;

  double outdoor_temp(Timestamp t) const;
  double outdoor_lux(Timestamp t) const;

  bool operator==(const WeatherProfile&) const = default;
};

struct DynamicsConfig {
  double setpoint = 24.0;
  Duration tau_ac{15 * 60};
  Duration tau_room{60 * 60};
  double window_factor = 0.05;
  double lights_lux = 400.0;

  bool operator==(const DynamicsConfig&) const = default;
};

/// Scripted occupant habits that produce the appliance usage.
struct BehaviorConfig {
  /// Arriving user turns the lights on when the room is darker than this.
  double lights_on_below_lux = 1500.0;
  double ac_on_above_temp = 26.0;
  bool monitor_on_arrival = true;
  /// The occupant does not switch an appliance back on within this time of
  /// its last toggle.
  Duration retoggle_delay{30 * 60};
  /// Per-minute chance that an occupied minute reports no motion.
  double motion_dropout = 0.05;

  bool operator==(const BehaviorConfig&) const = default;
};

struct ScenarioSpec {
  std::string id;
  OccupancySchedule occupancy;
  WeatherProfile weather;
  std::vector<Appliance> appliances;
  double initial_indoor_temp = 26.0;
  DynamicsConfig dynamics;
  BehaviorConfig behavior;
  TariffPreset tariff = paper_example_preset();
  std::uint64_t seed = 0;
  /// Weeks of open-loop history the knowledge base is built from.
  int history_weeks = 3;

  /// Throws ValidationError naming the first schedule or curve gap.
  void validate() const;

  bool operator==(const ScenarioSpec&) const = default;
};

/// The shipped "office-week" scenario.
ScenarioSpec office_week_spec();

/// Scripted stand-in for a human evaluator.
struct Persona {
  std::string name;
  /// p_accept[mode][fact type][projection]; Plain ignores the last two indices.
  std::map<ScenarioMode, std::map<FactType, std::map<Projection, double>>> p_accept;
  double p_ignore = 0.0;
  Duration latency_min{2};
  Duration latency_max{18};

  double accept_probability(ScenarioMode mode, const std::optional<PersuasiveFact>& fact) const;
  void validate(const TimingConfig& timing = {}) const;

  /// Same acceptance in every cell.
  static Persona constant(std::string name, double p_accept, double p_ignore);
};

struct PersonaDecision {
  Response response = Response::None;
  Duration latency{0};
};

/// Memoryless response draw; always consumes three uniforms so that streams
/// stay aligned across modes.
PersonaDecision decide(const Persona& persona, const Recommendation& rec, Rng& rng);

struct IndoorState {
  double temp = 26.0;
  double lux = 0.0;
  std::vector<Appliance> appliances;

  bool appliance_on(ApplianceKind kind) const;
  bool operator==(const IndoorState&) const = default;
};

/// First-order relaxation over dt: toward the setpoint with the A/C on,
/// toward outdoor otherwise. Indoor light is daylight through the window plus
/// the lights' contribution.
IndoorState step_dynamics(IndoorState state, double outdoor_temp, double outdoor_lux, Duration dt,
                          const DynamicsConfig& cfg);

/// Building, weather and occupant, advanced minute by minute.
class World {
 public:
  World(const ScenarioSpec& spec, std::uint64_t seed);

  /// Advances to minute `t` (whole minutes, non-decreasing) and returns the
  /// readings sampled there. The first minute of a simulated day resets the
  /// room; the last one switches everything off.
  std::vector<SensorReading> step(Timestamp t);

  /// Remote turn-off from the engine.
  void switch_off(const ApplianceId& id, Timestamp t);

  const IndoorState& indoor() const { return indoor_; }
  bool present() const { return present_; }

 private:
  void user_behavior(Timestamp t);

  const ScenarioSpec* spec_;
  Rng rng_;
  IndoorState indoor_;
  std::optional<Timestamp> last_;
  bool present_ = false;
  std::map<ApplianceId, Timestamp> remote_off_;
};

/// Minutes of simulated activity in one week, in order.
std::vector<Timestamp> week_minutes(const OccupancySchedule& schedule, int week);

/// Open-loop readings for `weeks` consecutive weeks starting at `first_week`.
std::vector<SensorReading> generate_trace(const ScenarioSpec& spec, int first_week = 0, int weeks = 1,
                                          std::optional<std::uint64_t> seed = std::nullopt);

/// Knowledge base from spec.history_weeks weeks of history preceding `week`.
KnowledgeBase history_knowledge(const ScenarioSpec& spec, int week, std::uint64_t seed, const Thresholds& th = {});

/// Seeds of the independent random streams of one run.
struct StreamSeeds {
  std::uint64_t world;
  std::uint64_t persona;
  static StreamSeeds of(std::uint64_t seed) { return {derive_seed(seed, 0), derive_seed(seed, 2)}; }
};

/// Runs a session over a scenario week, one simulated minute at a time, and
/// jumps straight to the response instant while a recommendation is pending.
/// Actuations logged by the session are mirrored into the world.
class SessionDriver {
 public:
  enum class Status { Running, AwaitingResponse, Finished };

  /// `days` > 0 keeps only the first `days` simulated days of the week.
  SessionDriver(ScenarioSpec spec, SessionSetup setup, int week, int days = 0, Session::Observer observer = {});
  SessionDriver(const SessionDriver&) = delete;
  SessionDriver& operator=(const SessionDriver&) = delete;

  /// Processes one simulated minute unless a recommendation is pending.
  Status step();
  /// Processes everything up to `until`; pending recommendations whose
  /// deadline is reached are recorded as ignored. Stops early while one is
  /// pending with its deadline after `until`.
  Status advance(Timestamp until);
  Status advance_all() { return advance(end_); }

  Recommendation respond(std::uint64_t rec_id, Response response, Timestamp now);
  void re_enable(const ApplianceId& appliance, ReasonKind reason, Timestamp now);
  void finish();

  Status status() const;
  Timestamp now() const { return now_; }
  Timestamp start() const { return start_; }
  Timestamp end() const { return end_; }
  const Session& session() const { return *session_; }
  const World& world() const { return world_; }
  const ScenarioSpec& spec() const { return spec_; }

  friend std::unique_ptr<SessionDriver> rebuild_driver(const ScenarioSpec& spec, const EventLog& log, int days,
                                                       Session::Observer observer);

 private:
  ScenarioSpec spec_;
  World world_;
  Session::Observer observer_;
  std::unique_ptr<Session> session_;
  std::vector<Timestamp> minutes_;
  std::size_t next_minute_ = 0;
  Timestamp now_;
  Timestamp start_;
  Timestamp end_;
};

/// Re-executes a logged session (same spec, setup and responses) and checks
/// that the result reproduces the log. Used to recover live sessions.
std::unique_ptr<SessionDriver> rebuild_driver(const ScenarioSpec& spec, const EventLog& log, int days = 0,
                                              Session::Observer observer = {});

struct RunOptions {
  ScenarioMode mode = ScenarioMode::Explainable;
  std::uint64_t seed = 0;
  std::string user = "user";
  EngineConfig engine;
  ProjectionPolicy projection;
  AdaptConfig adapt;
  /// Simulated week; 0 picks spec.history_weeks. The knowledge base covers
  /// the weeks before it.
  int week = 0;
  /// Only the first `days` simulated days of the week are run (0 = all).
  int days = 0;
  std::optional<KnowledgeBase> kb;
  std::optional<PersuasionProfile> profile;
};

SessionSetup make_setup(const ScenarioSpec& spec, const RunOptions& opt);

/// Batch session with a scripted persona.
EventLog run_session(const ScenarioSpec& spec, const Persona& persona, const RunOptions& opt);

void to_json(Json& j, const OccupancySchedule& s);
void from_json(const Json& j, OccupancySchedule& s);
void to_json(Json& j, const WeatherProfile& w);
void from_json(const Json& j, WeatherProfile& w);
void to_json(Json& j, const DynamicsConfig& d);
void from_json(const Json& j, DynamicsConfig& d);
void to_json(Json& j, const BehaviorConfig& b);
void from_json(const Json& j, BehaviorConfig& b);
void to_json(Json& j, const ScenarioSpec& s);
void from_json(const Json& j, ScenarioSpec& s);
void to_json(Json& j, const RunOptions& o);
void from_json(const Json& j, RunOptions& o);
void to_json(Json& j, const Persona& p);
void from_json(const Json& j, Persona& p);

}  // namespace eerec
