#pragma once

// JSON-over-HTTP front end for SessionManager, with the per-session event
// stream served as server-sent events.

#include <chrono>
#include <memory>
#include <string>

#include "eerec/service.hpp"

namespace eerec {

struct HttpOptions {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  int port = 8080;
  /// How often sessions are advanced; zero leaves pumping to the caller.
  std::chrono::milliseconds pump_interval{100};
  /// Tick period of the event stream.
  std::chrono::milliseconds tick_interval{1000};
};

class HttpServer {
 public:
  HttpServer(SessionManager& manager, HttpOptions opt = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; returns the bound port. Throws Error on failure.
  int bind();
  /// Serves until stop(); binds first if needed.
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eerec
