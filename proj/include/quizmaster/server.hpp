#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "quizmaster/api.hpp"

namespace quizmaster {

// HTTP + WebSocket front end for an Api. HTTP requests map onto
// Api::handle; GET /sessions/{id}/stream upgrades to a WebSocket that first
// replays the session log and then pushes every new log line.
class Server {
 public:
  // port 0 picks a free port; see port().
  Server(std::shared_ptr<Api> api, const std::string& address, std::uint16_t port, unsigned threads = 2);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  void start();  // returns immediately; work runs on the server's threads
  void wait();   // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace quizmaster
