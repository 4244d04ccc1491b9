#include "eerec/service.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "eerec/errors.hpp"

namespace eerec {

namespace fs = std::filesystem;

double SteadyClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

double ManualClock::now() const {
  std::lock_guard lock(m_);
  return now_;
}

void ManualClock::advance(double seconds) {
  std::lock_guard lock(m_);
  now_ += seconds;
}

void ManualClock::set(double seconds) {
  std::lock_guard lock(m_);
  now_ = seconds;
}

fs::path resolve_data_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("EEREC_DATA_DIR"); env && *env) return env;
  return "data";
}

void from_json(const Json& j, CreateSessionRequest& r) {
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  r = CreateSessionRequest{};
  r.spec_id = j.value("spec_id", r.spec_id);
  r.run = j.get<RunOptions>();
  if (j.contains("speedup")) {
    r.speedup = j.at("speedup").get<double>();
    if (!(*r.speedup > 0.0)) throw ValidationError("speedup must be > 0");
  }
}

std::string_view to_string(LiveStatus s) {
  switch (s) {
    case LiveStatus::Running: return "running";
    case LiveStatus::Paused: return "paused";
    case LiveStatus::Finished: return "finished";
  }
  return "?";
}

struct SessionManager::Live {
  std::string id;
  std::string spec_id;
  int days = 0;
  double speedup = 60.0;

  std::mutex m;
  std::condition_variable cv;
  std::unique_ptr<SessionDriver> driver;
  std::vector<StreamItem> items;
  std::ofstream out;
  int subscribers = 0;
  LiveStatus status = LiveStatus::Paused;
  double wall_anchor = 0.0;
  Timestamp sim_anchor;
  /// Wall time at which the pending recommendation was shown.
  std::optional<double> pending_since;

  void record(const SessionEvent& e) {
    const auto line = to_jsonl_line(e);
    out << line << '\n';
    out.flush();
    items.push_back({e.seq, std::string(event_type(e.payload)), line});
    cv.notify_all();
  }

  Timestamp sim_time() const { return *driver->session().log().last_time(); }

  double window() const {
    return static_cast<double>(driver->session().setup().engine.timing.response_window.count());
  }

  void reanchor(double wall) {
    wall_anchor = wall;
    sim_anchor = std::max(sim_time(), sim_anchor);
  }
};

SessionManager::SessionManager(ServiceConfig cfg, std::shared_ptr<const Clock> clock)
    : cfg_(std::move(cfg)), clock_(std::move(clock)) {
  if (!clock_) clock_ = std::make_shared<SteadyClock>();
  if (!(cfg_.speedup > 0.0)) throw ValidationError("speedup must be > 0");
  fs::create_directories(cfg_.data_dir / "sessions");
  fs::create_directories(cfg_.data_dir / "kb");
  add_spec(office_week_spec());
}

SessionManager::~SessionManager() = default;

void SessionManager::add_spec(ScenarioSpec spec) {
  spec.validate();
  std::lock_guard lock(m_);
  specs_[spec.id] = std::move(spec);
}

std::shared_ptr<SessionManager::Live> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(m_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("session '" + id + "' not found");
  return it->second;
}

std::shared_ptr<SessionManager::Live> SessionManager::open_live(std::string id, std::string spec_id, int days,
                                                                double speedup) {
  auto s = std::make_shared<Live>();
  s->id = std::move(id);
  s->spec_id = std::move(spec_id);
  s->days = days;
  s->speedup = speedup;
  s->status = cfg_.pause_without_subscribers ? LiveStatus::Paused : LiveStatus::Running;
  return s;
}

std::size_t SessionManager::recover() {
  const auto specs_dir = cfg_.data_dir / "specs";
  if (fs::is_directory(specs_dir)) {
    for (const auto& entry : fs::directory_iterator(specs_dir)) {
      if (entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      add_spec(Json::parse(in).get<ScenarioSpec>());
    }
  }

  std::size_t recovered = 0;
  for (const auto& entry : fs::directory_iterator(cfg_.data_dir / "sessions")) {
    const auto path = entry.path();
    if (path.extension() != ".json" || path.stem().extension() != ".meta") continue;
    try {
      std::ifstream meta_in(path);
      const Json meta = Json::parse(meta_in);
      const std::string id = meta.at("id").get<std::string>();
      const auto log_path = cfg_.data_dir / "sessions" / (id + ".jsonl");
      const EventLog log = read_log_file(log_path.string());
      ScenarioSpec spec;
      {
        std::lock_guard lock(m_);
        auto it = specs_.find(meta.at("spec_id").get<std::string>());
        if (it == specs_.end()) throw NotFoundError("unknown spec '" + meta.at("spec_id").get<std::string>() + "'");
        spec = it->second;
      }
      auto s = open_live(id, spec.id, meta.value("days", 0), meta.value("speedup", cfg_.speedup));
      Live* raw = s.get();
      s->driver = rebuild_driver(spec, log, s->days, [raw](const SessionEvent& e) { raw->record(e); });
      s->out.open(log_path, std::ios::app);
      const auto events = s->driver->session().log().events();
      for (const auto& e : events) {
        const auto line = to_jsonl_line(e);
        if (e.seq > log.last_seq()) s->out << line << '\n';
        s->items.push_back({e.seq, std::string(event_type(e.payload)), line});
      }
      s->out.flush();
      const double wall = clock_->now();
      if (s->driver->session().state().finished) s->status = LiveStatus::Finished;
      if (const auto* rec = s->driver->session().state().pending_recommendation())
        s->pending_since = wall - static_cast<double>((s->sim_time() - rec->created_at).count());
      s->sim_anchor = s->sim_time();
      s->wall_anchor = wall;
      std::lock_guard lock(m_);
      sessions_[id] = s;
      const auto digits = id.find_first_of("0123456789");
      if (digits != std::string::npos) next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(digits)) + 1);
      ++recovered;
    } catch (const std::exception& ex) {
      std::cerr << "eerec: cannot recover " << path.string() << ": " << ex.what() << "\n";
    }
  }
  return recovered;
}

Json SessionManager::create(const CreateSessionRequest& req) {
  ScenarioSpec spec;
  std::string id;
  {
    std::lock_guard lock(m_);
    auto it = specs_.find(req.spec_id);
    if (it == specs_.end()) throw NotFoundError("unknown spec '" + req.spec_id + "'");
    spec = it->second;
    id = "s" + std::to_string(next_id_++);
  }
  const auto setup = make_setup(spec, req.run);
  const int week = req.run.week > 0 ? req.run.week : spec.history_weeks;
  auto s = open_live(id, spec.id, req.run.days, req.speedup.value_or(cfg_.speedup));

  const auto dir = cfg_.data_dir / "sessions";
  {
    std::ofstream meta(dir / (id + ".meta.json"));
    meta << Json{{"id", id}, {"spec_id", spec.id}, {"days", s->days}, {"speedup", s->speedup}}.dump() << '\n';
    std::ofstream kb(cfg_.data_dir / "kb" / (id + ".json"));
    kb << Json(setup.kb).dump() << '\n';
  }
  s->out.open(dir / (id + ".jsonl"), std::ios::trunc);
  if (!s->out) throw Error("cannot write " + (dir / (id + ".jsonl")).string());
  Live* raw = s.get();
  s->driver = std::make_unique<SessionDriver>(spec, setup, week, s->days, [raw](const SessionEvent& e) { raw->record(e); });
  s->wall_anchor = clock_->now();
  s->sim_anchor = s->driver->start();
  {
    std::lock_guard lock(m_);
    sessions_[id] = s;
  }
  return handle(id);
}

void SessionManager::advance_locked(Live& s, double wall) {
  if (s.status == LiveStatus::Finished) return;
  auto& d = *s.driver;
  if (const auto* rec = d.session().state().pending_recommendation()) {
    if (!s.pending_since) s.pending_since = wall;
    if (wall - *s.pending_since < s.window()) return;
    d.advance(rec->deadline);
    s.pending_since.reset();
    s.reanchor(wall);
  }
  if (s.status == LiveStatus::Paused) {
    s.reanchor(wall);
    return;
  }
  const auto elapsed = static_cast<std::int64_t>(std::floor((wall - s.wall_anchor) * s.speedup));
  const auto st = d.advance(s.sim_anchor + Duration{elapsed});
  if (st == SessionDriver::Status::AwaitingResponse) s.pending_since = wall;
  if (st == SessionDriver::Status::Finished) {
    s.status = LiveStatus::Finished;
    s.cv.notify_all();
  }
}

void SessionManager::pump() {
  std::vector<std::shared_ptr<Live>> all;
  {
    std::lock_guard lock(m_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  const double wall = clock_->now();
  for (const auto& s : all) {
    std::lock_guard lock(s->m);
    advance_locked(*s, wall);
  }
}

namespace {

Json pending_json(const Recommendation& rec, const RecommendationIssued* issued, double remaining) {
  Json j{{"rec_id", rec.id}, {"appliance", rec.appliance}, {"reason", rec.reason.kind},
         {"created_at", rec.created_at}, {"deadline", rec.deadline}, {"remaining_s", remaining}};
  if (issued) j["message"] = issued->message;
  return j;
}

}  // namespace

Json SessionManager::handle(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->m);
  const auto& session = s->driver->session();
  const auto& setup = session.setup();
  const double wall = clock_->now();
  Json j{{"id", s->id},
         {"session_id", setup.session_id},
         {"user", setup.user},
         {"mode", setup.mode},
         {"spec_id", s->spec_id},
         {"seed", setup.seed},
         {"speedup", s->speedup},
         {"status", std::string(to_string(s->status))},
         {"t", s->sim_time()},
         {"time", format_timestamp(s->sim_time())},
         {"last_seq", session.log().last_seq()},
         {"pending", nullptr}};
  if (const auto* rec = session.state().pending_recommendation()) {
    const RecommendationIssued* issued = nullptr;
    for (auto it = session.log().events().rbegin(); it != session.log().events().rend() && !issued; ++it)
      issued = std::get_if<RecommendationIssued>(&it->payload);
    const double shown = s->pending_since.value_or(wall);
    j["pending"] = pending_json(*rec, issued, std::max(0.0, s->window() - (wall - shown)));
  }
  return j;
}

Json SessionManager::list() const {
  std::vector<std::string> ids;
  {
    std::lock_guard lock(m_);
    for (const auto& [id, s] : sessions_) ids.push_back(id);
  }
  Json out = Json::array();
  for (const auto& id : ids) out.push_back(handle(id));
  return out;
}

Json SessionManager::respond(const std::string& id, std::uint64_t rec_id, Response response) {
  if (response == Response::None) throw ValidationError("response must be accept or reject");
  auto s = find(id);
  std::lock_guard lock(s->m);
  const double wall = clock_->now();
  advance_locked(*s, wall);

  auto& d = *s->driver;
  const auto& recs = d.session().state().recommendations;
  auto it = recs.find(rec_id);
  if (it == recs.end()) throw NotFoundError("recommendation " + std::to_string(rec_id) + " not found");
  const Recommendation rec = it->second;
  if (rec.lifecycle == Lifecycle::Ignored) throw ConflictError(ConflictError::Kind::WindowElapsed, "window elapsed");
  if (rec.lifecycle != Lifecycle::Pending)
    throw ConflictError(ConflictError::Kind::AlreadyResolved, "already resolved");

  const double elapsed = wall - s->pending_since.value_or(wall);
  const auto t = rec.created_at + Duration{static_cast<std::int64_t>(std::floor(elapsed))};
  const auto before = d.session().log().last_seq();
  const auto resolved = d.respond(rec_id, response, std::min(t, rec.deadline));
  s->pending_since.reset();
  s->reanchor(wall);

  Json ack{{"rec_id", rec_id}, {"response", response}, {"lifecycle", resolved.lifecycle}, {"t", s->sim_time()},
           {"actuation", nullptr}};
  for (const auto& e : d.session().log().since(before))
    if (const auto* a = std::get_if<ActuationApplied>(&e.payload))
      ack["actuation"] = Json{{"seq", e.seq}, {"appliance", a->appliance}, {"applied", a->applied}, {"ack", a->ack}};
  return ack;
}

void SessionManager::re_enable(const std::string& id, const ApplianceId& appliance, ReasonKind reason) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  advance_locked(*s, clock_->now());
  if (s->status == LiveStatus::Finished) throw ConflictError(ConflictError::Kind::AlreadyResolved, "session finished");
  s->driver->re_enable(appliance, reason, s->sim_time());
}

namespace {

Json report_of(const std::string& id, LiveStatus status, std::span<const SessionEvent> events) {
  const SessionSummary summary = summarize(events);
  const std::vector<SessionSummary> one{summary};
  return Json{{"id", id}, {"status", std::string(to_string(status))}, {"summary", summary},
              {"report", report_metrics(one)}};
}

}  // namespace

Json SessionManager::report(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->m);
  return report_of(s->id, s->status, s->driver->session().log().events());
}

std::vector<StreamItem> SessionManager::wait_events(const std::string& id, std::uint64_t after,
                                                    std::chrono::milliseconds timeout) {
  auto s = find(id);
  std::unique_lock lock(s->m);
  s->cv.wait_for(lock, timeout, [&] { return s->items.size() > after || s->status == LiveStatus::Finished; });
  if (after >= s->items.size()) return {};
  return {s->items.begin() + static_cast<std::ptrdiff_t>(after), s->items.end()};
}

StreamItem SessionManager::tick(const std::string& id) const {
  const Json h = handle(id);
  Json data{{"t", h["t"]}, {"time", h["time"]}, {"status", h["status"]}, {"pending", nullptr},
            {"remaining_s", nullptr}};
  if (!h["pending"].is_null()) {
    data["pending"] = h["pending"]["rec_id"];
    data["remaining_s"] = h["pending"]["remaining_s"];
  }
  return {std::nullopt, "tick", data.dump()};
}

std::optional<StreamItem> SessionManager::final_stats(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->m);
  if (s->status != LiveStatus::Finished) return std::nullopt;
  return StreamItem{std::nullopt, "stats", report_of(s->id, s->status, s->driver->session().log().events()).dump()};
}

bool SessionManager::finished(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->m);
  return s->status == LiveStatus::Finished;
}

SessionManager::Subscription SessionManager::subscribe(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  const double wall = clock_->now();
  advance_locked(*s, wall);
  if (++s->subscribers == 1 && s->status == LiveStatus::Paused) {
    s->status = LiveStatus::Running;
    s->reanchor(wall);
  }
  return Subscription(this, id);
}

SessionManager::Subscription::~Subscription() {
  if (!m_) return;
  try {
    auto s = m_->find(id_);
    std::lock_guard lock(s->m);
    const double wall = m_->clock_->now();
    m_->advance_locked(*s, wall);
    if (--s->subscribers == 0 && m_->cfg_.pause_without_subscribers && s->status == LiveStatus::Running) {
      s->status = LiveStatus::Paused;
      s->reanchor(wall);
    }
  } catch (const std::exception&) {
  }
}

}  // namespace eerec
