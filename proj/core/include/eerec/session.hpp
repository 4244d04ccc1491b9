#pragma once

// One recommendation session: a state folded from the event log, and the
// command surface (ingest / tick / respond / finish) that appends to it.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "eerec/event.hpp"
#include "eerec/rng.hpp"

namespace eerec {

/// Engine state reconstructed purely from events. apply() is the only way it changes.
struct SessionState {
  std::optional<SessionSetup> setup;
  ContextTracker tracker;
  ReissueState reissue;
  std::map<std::uint64_t, Recommendation> recommendations;
  std::optional<std::uint64_t> pending;
  PersuasionProfile profile;
  std::uint64_t next_rec_id = 1;
  /// Engine random stream position.
  std::uint64_t rng_draws = 0;
  std::uint64_t last_seq = 0;
  std::optional<Timestamp> last_time;
  std::uint64_t micro_moments = 0;
  bool finished = false;

  /// Throws ValidationError when the event does not fit the current state.
  void apply(const SessionEvent& e);

  const Recommendation* pending_recommendation() const;

  bool operator==(const SessionState&) const = default;
};

/// Canonical JSON of the whole state (sorted keys).
Json state_json(const SessionState& s);
/// FNV-1a 64 over the canonical JSON dump.
std::uint64_t state_hash(const SessionState& s);
std::string hash_hex(std::uint64_t h);

/// Folds a log from an empty state.
SessionState replay(std::span<const SessionEvent> events);

/// Session writer. Every command validates, then emits events through the
/// same apply() used by replay.
class Session {
 public:
  using Observer = std::function<void(const SessionEvent&)>;

  static Session start(SessionSetup setup, Timestamp t0, Observer observer = {});
  /// Continues a session from its log; the engine random stream is restored.
  static Session resume(const EventLog& log, Observer observer = {});

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  void ingest(const SensorReading& r);

  /// Evaluates the context at `now`: micro-moments, episode resets, automatic
  /// actuation of flagged keys, and at most one new recommendation while none
  /// is pending. Returns the issued recommendation, if any.
  std::optional<Recommendation> tick(Timestamp now);

  /// Records the pending recommendation as ignored once its deadline passed.
  bool expire(Timestamp now);

  /// Accept or reject (or `None` at/after the deadline). Throws NotFoundError
  /// for an unknown id and ConflictError for late or repeated responses.
  Recommendation respond(std::uint64_t rec_id, Response response, Timestamp now);

  /// Lifts a permanent pause on one (appliance, reason) key.
  void re_enable(const ApplianceId& appliance, ReasonKind reason, Timestamp now);

  /// Withdraws a still-pending recommendation and closes the log.
  void finish(Timestamp now);

  const SessionState& state() const { return state_; }
  const EventLog& log() const { return log_; }
  const SessionSetup& setup() const { return *state_.setup; }
  std::optional<ContextSnapshot> snapshot(Timestamp now) const;

 private:
  Session() = default;
  void emit(Timestamp t, EventPayload payload);
  Timestamp at_least_last(Timestamp t) const;

  SessionState state_;
  EventLog log_;
  Rng rng_;
  Observer observer_;
  std::optional<ContextSnapshot> previous_;
};

/// Engine random stream of a session seed.
inline std::uint64_t engine_stream_seed(std::uint64_t session_seed) { return derive_seed(session_seed, 1); }

}  // namespace eerec
