#pragma once

// HTTP/JSON service over the session store:
//   POST /api/sessions                      -> 201 {id}
//   GET  /api/sessions/{id}                 -> session status
//   POST /api/sessions/{id}/messages        -> 202 {run_id}   body {text, mode?}
//   GET  /api/sessions/{id}/report          -> report.json, 204 while running
//   GET  /api/sessions/{id}/fields/{name}   -> one named cell array with its mesh

#include <filesystem>
#include <memory>
#include <string>

#include "emsim/pipeline.hpp"

namespace emsim::server {

struct ServerConfig {
  std::filesystem::path root = "sessions";
  pipeline::WorkflowOptions options;
  pipeline::Mode default_mode = pipeline::Mode::WithPostAndSummary;
  std::string cors_origin = "*";
};

class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  bool listen_after_bind();
  void stop();
  /// Blocks until no workflow run is in flight.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emsim::server
