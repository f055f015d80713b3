#pragma once

// HTTP API: POST /query, GET /runs, GET /runs/{id}, GET /runs/{id}/artifacts/{file},
// GET /tools, POST /uploads. Routing is transport independent (`dispatch`) so
// it can be exercised without sockets; `serve` binds it to an HTTP listener.

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "eoscript/controller.hpp"
#include "eoscript/llm_backend.hpp"
#include "eoscript/registry.hpp"
#include "eoscript/run_store.hpp"

namespace eoscript {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "eoscript-data";  // holds runs/, uploads/, work/
  std::size_t max_upload_bytes = 64ULL << 20;
  ControllerConfig controller;

  std::filesystem::path runs_dir() const { return data_dir / "runs"; }
  std::filesystem::path uploads_dir() const { return data_dir / "uploads"; }
  std::filesystem::path work_dir() const { return data_dir / "work"; }

  // EOSCRIPT_HOST, EOSCRIPT_PORT, EOSCRIPT_DATA_DIR, EOSCRIPT_MAX_UPLOAD_BYTES, EOSCRIPT_MAX_RETRIES.
  static ServiceConfig from_env();
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query_params;
  std::string content_type;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Service {
 public:
  Service(Registry registry, std::shared_ptr<const LlmBackend> backend, ServiceConfig config);

  HttpResponse dispatch(const HttpRequest& request) const;

  // Blocks until stop(). Returns false if the socket could not be bound.
  bool serve();
  // Binds to an ephemeral port, serves on a background thread, returns the port (or -1).
  int serve_in_background();
  void stop();

  const ServiceConfig& config() const noexcept { return config_; }
  const Registry& registry() const noexcept { return registry_; }

 private:
  HttpResponse post_query(const HttpRequest& request) const;
  HttpResponse post_upload(const HttpRequest& request) const;
  HttpResponse get_tools() const;
  HttpResponse get_runs() const;
  HttpResponse get_run(const std::string& id) const;
  HttpResponse get_artifact(const std::string& id, const std::string& file) const;

  Registry registry_;
  std::shared_ptr<const LlmBackend> backend_;
  ServiceConfig config_;
  ControllerConfig controller_;
  RunStore store_;

  struct ServerHandle;
  std::shared_ptr<ServerHandle> server_;
};

nlohmann::json query_response(const RunRecord& record);

}  // namespace eoscript
