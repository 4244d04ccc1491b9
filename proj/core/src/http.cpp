#include "eerec/http.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

#include "eerec/errors.hpp"

namespace eerec {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, Json{{"error", code}, {"message", message}});
}

// Runs a handler and maps library errors to HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const ConflictError& e) {
      const bool late = e.kind() == ConflictError::Kind::WindowElapsed;
      send_error(res, 409, late ? "window_elapsed" : "already_resolved", e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, "validation", e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "validation", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

std::string sse_frame(const StreamItem& item) {
  std::string out;
  if (item.seq) out += "id: " + std::to_string(*item.seq) + "\n";
  out += "event: " + item.event + "\n";
  out += "data: " + item.data + "\n\n";
  return out;
}

struct StreamState {
  std::optional<SessionManager::Subscription> sub;
  std::string id;
  std::uint64_t after = 0;
  std::vector<std::string> types;
  std::chrono::steady_clock::time_point last_tick{};
  bool done = false;

  bool wanted(const std::string& type) const {
    return types.empty() || std::find(types.begin(), types.end(), type) != types.end();
  }
};

}  // namespace

struct HttpServer::Impl {
  SessionManager& manager;
  HttpOptions opt;
  httplib::Server server;
  int port = -1;
  std::atomic<bool> running{false};
  std::thread serve_thread;
  std::thread pump_thread;

  Impl(SessionManager& m, HttpOptions o) : manager(m), opt(std::move(o)) { routes(); }

  void routes();
  void stream(const httplib::Request& req, httplib::Response& res);

  void start_pump() {
    if (opt.pump_interval.count() <= 0 || pump_thread.joinable()) return;
    pump_thread = std::thread([this] {
      while (running) {
        manager.pump();
        std::this_thread::sleep_for(opt.pump_interval);
      }
    });
  }
};

void HttpServer::Impl::routes() {
  server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 201, manager.create(body_json(req).get<CreateSessionRequest>()));
  }));
  server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, manager.list());
  }));
  server.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, manager.handle(req.path_params.at("id")));
  }));
  server.Get("/sessions/:id/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, manager.report(req.path_params.at("id")));
  }));
  server.Post("/sessions/:id/recommendations/:rid/response",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const Json body = body_json(req);
                const auto response = parse_enum<Response>(body.at("response").get<std::string>());
                std::uint64_t rid = 0;
                try {
                  rid = std::stoull(req.path_params.at("rid"));
                } catch (const std::logic_error&) {
                  throw ValidationError("bad recommendation id");
                }
                send_json(res, 200, manager.respond(req.path_params.at("id"), rid, response));
              }));
  server.Post("/sessions/:id/re-enable", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Json body = body_json(req);
    manager.re_enable(req.path_params.at("id"), body.at("appliance").get<std::string>(),
                      parse_enum<ReasonKind>(body.at("reason").get<std::string>()));
    send_json(res, 200, manager.handle(req.path_params.at("id")));
  }));
  server.Get("/sessions/:id/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
    stream(req, res);
  }));
}

void HttpServer::Impl::stream(const httplib::Request& req, httplib::Response& res) {
  const std::string id = req.path_params.at("id");
  auto st = std::make_shared<StreamState>();
  st->id = id;
  std::string after;
  if (req.has_header("Last-Event-ID")) after = req.get_header_value("Last-Event-ID");
  if (req.has_param("after")) after = req.get_param_value("after");
  if (!after.empty()) {
    try {
      st->after = std::stoull(after);
    } catch (const std::logic_error&) {
      throw ValidationError("bad Last-Event-ID");
    }
  }
  if (req.has_param("types")) {
    std::string list = req.get_param_value("types");
    std::size_t pos = 0;
    while (pos <= list.size()) {
      const auto comma = std::min(list.find(',', pos), list.size());
      if (comma > pos) st->types.push_back(list.substr(pos, comma - pos));
      pos = comma + 1;
    }
  }
  st->sub.emplace(manager.subscribe(id));

  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider("text/event-stream", [this, st](std::size_t, httplib::DataSink& sink) {
    if (st->done || !running) {
      sink.done();
      return true;
    }
    try {
      const auto wait = std::min(opt.tick_interval, std::chrono::milliseconds(250));
      std::string out;
      for (const auto& item : manager.wait_events(st->id, st->after, wait)) {
        st->after = *item.seq;
        if (st->wanted(item.event)) out += sse_frame(item);
      }
      const auto now = std::chrono::steady_clock::now();
      if (now - st->last_tick >= opt.tick_interval) {
        st->last_tick = now;
        if (st->wanted("tick")) out += sse_frame(manager.tick(st->id));
      }
      if (manager.finished(st->id) && manager.wait_events(st->id, st->after, std::chrono::milliseconds(0)).empty()) {
        if (auto stats = manager.final_stats(st->id)) out += sse_frame(*stats);
        st->done = true;
      }
      if (!out.empty() && !sink.write(out.data(), out.size())) return false;
      if (st->done) sink.done();
      return true;
    } catch (const std::exception&) {
      return false;
    }
  });
}

HttpServer::HttpServer(SessionManager& manager, HttpOptions opt)
    : impl_(std::make_unique<Impl>(manager, std::move(opt))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->opt.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->opt.host);
  } else if (impl_->server.bind_to_port(impl_->opt.host, impl_->opt.port)) {
    impl_->port = impl_->opt.port;
  }
  if (impl_->port < 0) throw Error("cannot bind " + impl_->opt.host + ":" + std::to_string(impl_->opt.port));
  return impl_->port;
}

void HttpServer::listen() {
  bind();
  impl_->running = true;
  impl_->start_pump();
  impl_->server.listen_after_bind();
}

void HttpServer::start() {
  bind();
  impl_->running = true;
  impl_->start_pump();
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->running = false;
  impl_->server.stop();
  if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
  if (impl_->pump_thread.joinable()) impl_->pump_thread.join();
}

int HttpServer::port() const { return impl_->port; }

}  // namespace eerec
