#include "eoscript/llm_backend.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "eoscript/digest.hpp"

namespace eoscript {
using nlohmann::json;

BackendError::BackendError(BackendErrc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

std::string query_digest(const std::string& query) { return sha256_hex(query); }

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> fixtures)
    : fixtures_(std::move(fixtures)) {}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BackendError(BackendErrc::Unavailable, "scripted fixture file " + path.string() + " not found");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw BackendError(BackendErrc::Unavailable, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw BackendError(BackendErrc::Unavailable, path.string() + ": expected a JSON object");
  std::map<std::string, std::vector<std::string>> fixtures;
  for (const auto& [digest, value] : doc.items()) {
    if (value.is_string()) {
      fixtures[digest] = {value.get<std::string>()};
    } else if (value.is_array() && !value.empty() && std::all_of(value.begin(), value.end(), [](const json& v) {
                 return v.is_string();
               })) {
      fixtures[digest] = value.get<std::vector<std::string>>();
    } else {
      throw BackendError(BackendErrc::Unavailable, path.string() + ": fixture " + digest + " must be text or a list");
    }
  }
  return ScriptedBackend(std::move(fixtures));
}

std::string ScriptedBackend::complete(const CompletionRequest& request) const {
  const auto it = fixtures_.find(query_digest(request.query));
  if (it == fixtures_.end() || it->second.empty()) {
    throw BackendError(BackendErrc::Unavailable, "no scripted completion for this query");
  }
  const auto& list = it->second;
  const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(request.attempt, 0)), list.size() - 1);
  if (list[idx].find_first_not_of(" \t\r\n") == std::string::npos) {
    throw BackendError(BackendErrc::EmptyCompletion, "scripted completion is empty");
  }
  return list[idx];
}

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  c.endpoint = env_or("EOSCRIPT_LLM_ENDPOINT", "");
  c.model = env_or("EOSCRIPT_LLM_MODEL", "gpt-4o");
  c.api_key = env_or("EOSCRIPT_LLM_API_KEY", "");
  c.temperature = std::stod(env_or("EOSCRIPT_LLM_TEMPERATURE", "0"));
  c.timeout = std::chrono::seconds(std::stol(env_or("EOSCRIPT_LLM_TIMEOUT_S", "120")));
  return c;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {}

std::string RemoteBackend::complete(const CompletionRequest& request) const {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url_re)) {
    throw BackendError(BackendErrc::Unavailable, "LLM endpoint '" + config_.endpoint + "' is not an http(s) URL");
  }
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";

  json messages = json::array();
  for (const auto& msg : request.messages) messages.push_back({{"role", msg.role}, {"content", msg.content}});
  const json body{{"model", config_.model}, {"temperature", config_.temperature}, {"messages", messages}};

  httplib::Client client(base);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(BackendErrc::Unavailable,
                       "LLM endpoint unreachable: " + httplib::to_string(res.error()) + " (" + base + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(BackendErrc::Unavailable,
                       "LLM endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  std::string content;
  try {
    const json doc = json::parse(res->body);
    const auto& msg = doc.at("choices").at(0).at("message");
    if (msg.contains("content") && msg["content"].is_string()) content = msg["content"].get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(BackendErrc::Unavailable, std::string("malformed chat-completion response: ") + e.what());
  }
  if (content.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw BackendError(BackendErrc::EmptyCompletion, "LLM returned an empty completion");
  }
  return content;
}

}  // namespace eoscript
