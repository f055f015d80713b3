#include "eoscript/service.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "eoscript/raster_io.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump(2) + "\n"}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

bool is_safe_filename(const std::string& name) {
  if (name.empty() || name == "." || name == ".." || name.size() > 128) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

std::string content_type_for(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".json") return "application/json";
  return "application/octet-stream";
}

std::string new_upload_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[24];
  std::snprintf(buf, sizeof buf, "upl-%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

bool is_png_bytes(const std::string& body) {
  static const char magic[] = "\x89PNG\r\n\x1a\n";
  return body.size() >= 8 && body.compare(0, 8, magic, 8) == 0;
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  c.host = env_or("EOSCRIPT_HOST", c.host);
  c.port = std::stoi(env_or("EOSCRIPT_PORT", std::to_string(c.port)));
  c.data_dir = env_or("EOSCRIPT_DATA_DIR", c.data_dir.string());
  c.max_upload_bytes = std::stoull(env_or("EOSCRIPT_MAX_UPLOAD_BYTES", std::to_string(c.max_upload_bytes)));
  c.controller.max_retries = std::stoi(env_or("EOSCRIPT_MAX_RETRIES", std::to_string(c.controller.max_retries)));
  return c;
}

struct Service::ServerHandle {
  httplib::Server server;
  std::thread thread;
  ~ServerHandle() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

Service::Service(Registry registry, std::shared_ptr<const LlmBackend> backend, ServiceConfig config)
    : registry_(std::move(registry)),
      backend_(std::move(backend)),
      config_(std::move(config)),
      controller_(config_.controller),
      store_(config_.runs_dir()) {
  controller_.work_root = config_.work_dir();
  fs::create_directories(config_.uploads_dir());
  fs::create_directories(config_.work_dir());
}

json query_response(const RunRecord& record) {
  json artifacts = json::array();
  for (const auto& a : record.artifacts) {
    artifacts.push_back("/runs/" + record.id + "/artifacts/" + fs::path(a).filename().string());
  }
  const json full = to_json(record);
  return {{"run_id", record.id},
          {"code", record.script},
          {"verdict", full["verdict"]},
          {"output", record.output},
          {"artifacts", artifacts},
          {"outcome", full["outcome"]},
          {"record", full}};
}

HttpResponse Service::dispatch(const HttpRequest& req) const {
  const auto parts = split_path(req.path);
  try {
    if (req.method == "POST" && parts == std::vector<std::string>{"query"}) return post_query(req);
    if (req.method == "POST" && parts == std::vector<std::string>{"uploads"}) return post_upload(req);
    if (req.method == "GET" && parts == std::vector<std::string>{"tools"}) return get_tools();
    if (req.method == "GET" && parts == std::vector<std::string>{"runs"}) return get_runs();
    if (req.method == "GET" && parts.size() == 2 && parts[0] == "runs") return get_run(parts[1]);
    if (req.method == "GET" && parts.size() == 4 && parts[0] == "runs" && parts[2] == "artifacts") {
      return get_artifact(parts[1], parts[3]);
    }
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  return error_response(404, "no route for " + req.method + " " + req.path);
}

HttpResponse Service::post_query(const HttpRequest& req) const {
  const json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return error_response(400, "request body must be a JSON object");
  if (!doc.contains("query") || !doc["query"].is_string()) return error_response(400, "field 'query' must be a string");
  const std::string query = doc["query"].get<std::string>();
  if (query.find_first_not_of(" \t\r\n") == std::string::npos) return error_response(422, "query is empty");

  std::vector<fs::path> attachments;
  if (doc.contains("attachments")) {
    if (!doc["attachments"].is_array()) return error_response(400, "field 'attachments' must be a list of upload ids");
    for (const auto& a : doc["attachments"]) {
      const std::string id = a.is_string() ? a.get<std::string>() : (a.is_object() ? a.value("id", "") : "");
      if (!is_safe_id(id)) return error_response(400, "malformed attachment reference");
      const fs::path dir = config_.uploads_dir() / id;
      std::vector<fs::path> files;
      std::error_code ec;
      for (const auto& e : fs::directory_iterator(dir, ec)) files.push_back(e.path());
      if (files.size() != 1) return error_response(400, "unknown upload '" + id + "'");
      attachments.push_back(files.front());
    }
  }

  ControllerConfig cfg = controller_;
  if (doc.contains("limits")) {
    const auto& l = doc["limits"];
    if (!l.is_object()) return error_response(400, "field 'limits' must be an object");
    auto tighten = [&](const char* key, auto& slot, auto current) -> bool {
      if (!l.contains(key)) return true;
      if (!l[key].is_number_integer() || l[key].get<std::int64_t>() <= 0) return false;
      const auto v = l[key].get<std::uint64_t>();
      if (v > static_cast<std::uint64_t>(current)) return false;
      slot = static_cast<std::remove_reference_t<decltype(slot)>>(v);
      return true;
    };
    std::int64_t wall_ms = cfg.limits.wall_clock.count();
    bool ok = tighten("max_steps", cfg.limits.max_steps, cfg.limits.max_steps) &&
              tighten("wall_clock_ms", wall_ms, wall_ms) &&
              tighten("max_value_store_bytes", cfg.limits.max_value_store_bytes, cfg.limits.max_value_store_bytes) &&
              tighten("max_tool_calls", cfg.limits.max_tool_calls, cfg.limits.max_tool_calls);
    if (!ok) return error_response(400, "limit overrides must be positive integers no larger than the server limits");
    cfg.limits.wall_clock = std::chrono::milliseconds(wall_ms);
  }

  const RunRecord record = handle_query(registry_, *backend_, query, attachments, cfg);
  store_.save(record);
  if (record.outcome.status == OutcomeStatus::RuntimeError && record.outcome.kind == "BackendUnavailable") {
    return json_response(502, {{"error", record.outcome.message}, {"run_id", record.id}});
  }
  return json_response(200, query_response(record));
}

HttpResponse Service::post_upload(const HttpRequest& req) const {
  if (req.body.size() > config_.max_upload_bytes) {
    return error_response(413, "upload exceeds " + std::to_string(config_.max_upload_bytes) + " bytes");
  }
  std::string kind;
  std::string default_name;
  if (is_png_bytes(req.body)) {
    kind = "image";
    default_name = "upload.png";
  } else if (const json doc = json::parse(req.body, nullptr, false); !doc.is_discarded() && doc.is_object()) {
    kind = "document";
    default_name = "upload.json";
  } else {
    return error_response(415, "unsupported upload format (expected PNG image or JSON document)");
  }
  std::string name = default_name;
  if (const auto it = req.query_params.find("name"); it != req.query_params.end()) {
    if (!is_safe_filename(it->second)) return error_response(400, "invalid file name");
    name = it->second;
    const auto ext = fs::path(name).extension().string();
    if ((kind == "image" && ext != ".png") || (kind == "document" && ext != ".json")) {
      name = fs::path(name).stem().string() + fs::path(default_name).extension().string();
    }
  }
  const std::string id = new_upload_id();
  const fs::path dir = config_.uploads_dir() / id;
  fs::create_directories(dir);
  write_file_atomic(dir / name, req.body);
  if (kind == "image") {
    try {
      (void)load_raster(dir / name);
    } catch (const std::exception& e) {
      fs::remove_all(dir);
      return error_response(415, std::string("unreadable PNG: ") + e.what());
    }
  }
  return json_response(201, {{"id", id}, {"filename", name}, {"kind", kind}, {"bytes", req.body.size()}});
}

HttpResponse Service::get_tools() const {
  json tools = json::array();
  for (const auto* spec : registry_.tools()) tools.push_back(to_manifest_json(*spec));
  return json_response(200, {{"catalog", render_prompt_catalog(registry_)}, {"tools", tools}});
}

HttpResponse Service::get_runs() const { return json_response(200, {{"runs", store_.summaries()}}); }

HttpResponse Service::get_run(const std::string& id) const {
  auto text = store_.load_text(id);
  if (!text) return error_response(404, "run '" + id + "' not found");
  return {200, "application/json", std::move(*text)};
}

HttpResponse Service::get_artifact(const std::string& id, const std::string& file) const {
  if (!is_safe_id(id) || !is_safe_filename(file)) return error_response(404, "artifact not found");
  const fs::path p = config_.work_dir() / id / "artifacts" / file;
  std::ifstream in(p, std::ios::binary);
  if (!in) return error_response(404, "artifact not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return {200, content_type_for(p), ss.str()};
}

namespace {

void install_routes(httplib::Server& server, const Service& service) {
  auto handler = [&service](const httplib::Request& r, httplib::Response& res) {
    HttpRequest req;
    req.method = r.method;
    req.path = r.path;
    for (const auto& [k, v] : r.params) req.query_params[k] = v;
    req.content_type = r.get_header_value("Content-Type");
    req.body = r.body;
    const HttpResponse out = service.dispatch(req);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.set_payload_max_length(service.config().max_upload_bytes + (1U << 20));
}

}  // namespace

bool Service::serve() {
  server_ = std::make_shared<ServerHandle>();
  install_routes(server_->server, *this);
  return server_->server.listen(config_.host, config_.port);
}

int Service::serve_in_background() {
  server_ = std::make_shared<ServerHandle>();
  install_routes(server_->server, *this);
  const int port = server_->server.bind_to_any_port(config_.host);
  if (port < 0) return -1;
  server_->thread = std::thread([h = server_.get()] { h->server.listen_after_bind(); });
  server_->server.wait_until_ready();
  return port;
}

void Service::stop() { server_.reset(); }

}  // namespace eoscript
