#pragma once

#include <memory>
#include <string>

#include "crowdorg/service/engine.hpp"

namespace crowdorg {

/// HTTP/JSON front end over an Engine.
///
///   POST /v1/runs                                   create a run
///   GET  /v1/runs                                   list run ids
///   GET  /v1/runs/{run}/tasks/next?worker_id=W      next task for W (204 if none)
///   POST /v1/runs/{run}/tasks/{task}/clustering     submit a clustering
///   POST /v1/runs/{run}/tasks/{task}/categorization submit categorization votes
///   GET  /v1/runs/{run}/report                      run report
///   POST /v1/runs/{run}/simulate                    drive a simulated run to completion
///   GET  /v1/health
class ApiServer {
 public:
  explicit ApiServer(Engine& engine);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds to an ephemeral port and returns it.
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Serves on the bound socket until stop(); blocks.
  void serve();
  /// serve() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Request-body decoding shared with the CLI: builds the corpus of a create
/// request from either an inline corpus document or a generator spec.
ItemCorpus corpus_from_request(const json& body, std::uint64_t seed);

}  // namespace crowdorg
