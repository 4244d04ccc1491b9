#pragma once

// Live sessions: a simulated office driven in (sped-up) wall-clock time, a
// human answering recommendations, logs persisted under a data directory.
// The HTTP front end in http.hpp is a thin layer over SessionManager.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eerec/metrics.hpp"
#include "eerec/sim.hpp"

namespace eerec {

/// Wall-clock source in seconds; replaceable so tests can drive time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
};

class SteadyClock : public Clock {
 public:
  double now() const override;
};

class ManualClock : public Clock {
 public:
  double now() const override;
  void advance(double seconds);
  void set(double seconds);

 private:
  mutable std::mutex m_;
  double now_ = 0.0;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  /// Simulated seconds per wall-clock second while no recommendation is pending.
  double speedup = 60.0;
  /// Running sessions pause while nobody is subscribed to their stream.
  bool pause_without_subscribers = true;
};

/// Data directory from the flag when given, else EEREC_DATA_DIR, else "data".
std::filesystem::path resolve_data_dir(const std::optional<std::string>& flag);

struct CreateSessionRequest {
  std::string spec_id = "office-week";
  /// Simulation parameters; the week defaults to the scenario's history length.
  RunOptions run;
  std::optional<double> speedup;
};

void from_json(const Json& j, CreateSessionRequest& r);

enum class LiveStatus { Running, Paused, Finished };
std::string_view to_string(LiveStatus s);

/// One item of a session's event stream.
struct StreamItem {
  /// Log sequence number; absent for tick and stats items.
  std::optional<std::uint64_t> seq;
  std::string event;
  std::string data;
};

class SessionManager {
 public:
  SessionManager(ServiceConfig cfg, std::shared_ptr<const Clock> clock);
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Loads scenario files from <data>/specs and recovers the sessions logged
  /// under <data>/sessions. Returns the number of sessions recovered.
  std::size_t recover();

  /// Throws NotFoundError for an unknown spec, ValidationError for bad input.
  Json create(const CreateSessionRequest& req);
  Json handle(const std::string& id) const;
  Json list() const;
  /// `response` must be Accept or Reject. Throws NotFoundError or ConflictError.
  Json respond(const std::string& id, std::uint64_t rec_id, Response response);
  void re_enable(const std::string& id, const ApplianceId& appliance, ReasonKind reason);
  Json report(const std::string& id) const;

  /// Advances every session to the current wall-clock time.
  void pump();

  /// Log events with seq > after, waiting up to `timeout` when there are
  /// none yet. Throws NotFoundError.
  std::vector<StreamItem> wait_events(const std::string& id, std::uint64_t after, std::chrono::milliseconds timeout);
  /// Countdown/clock tick for the stream.
  StreamItem tick(const std::string& id) const;
  /// Final statistics item; present once the session is finished.
  std::optional<StreamItem> final_stats(const std::string& id) const;
  bool finished(const std::string& id) const;

  /// Keeps a session running while held.
  class Subscription {
   public:
    Subscription() = default;
    Subscription(SessionManager* m, std::string id) : m_(m), id_(std::move(id)) {}
    Subscription(Subscription&& o) noexcept : m_(std::exchange(o.m_, nullptr)), id_(std::move(o.id_)) {}
    Subscription& operator=(Subscription&&) = delete;
    ~Subscription();

   private:
    SessionManager* m_ = nullptr;
    std::string id_;
  };
  Subscription subscribe(const std::string& id);

  void add_spec(ScenarioSpec spec);
  const ServiceConfig& config() const { return cfg_; }

 private:
  struct Live;

  std::shared_ptr<Live> find(const std::string& id) const;
  std::shared_ptr<Live> open_live(std::string id, std::string spec_id, int days, double speedup);
  void advance_locked(Live& s, double wall);

  ServiceConfig cfg_;
  std::shared_ptr<const Clock> clock_;
  mutable std::mutex m_;
  std::map<std::string, ScenarioSpec> specs_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace eerec
