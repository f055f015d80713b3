#pragma once

// Code-generation backends. Remote speaks the chat-completions JSON shape over
// HTTP(S) (see docs/backend.md); Scripted replays canned completions keyed by
// the SHA-256 of the user query.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eoscript {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  std::string query;  // the raw user query, for fixture lookup
  int attempt = 0;    // 0 for the first generation, 1.. for retries
};

enum class BackendErrc { Unavailable, EmptyCompletion };

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrc code, const std::string& message);
  BackendErrc code() const noexcept { return code_; }

 private:
  BackendErrc code_;
};

// Implementations must be safe to call from concurrent queries.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const CompletionRequest& request) const = 0;
  virtual std::string describe() const = 0;
};

class ScriptedBackend : public LlmBackend {
 public:
  // query digest -> one completion per attempt (the last one repeats).
  explicit ScriptedBackend(std::map<std::string, std::vector<std::string>> fixtures);

  // JSON object {digest: "text" | ["attempt 0", "attempt 1", ...]}.
  static ScriptedBackend from_file(const std::filesystem::path& path);

  std::string complete(const CompletionRequest& request) const override;
  std::string describe() const override { return "scripted"; }
  std::size_t size() const noexcept { return fixtures_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> fixtures_;
};

std::string query_digest(const std::string& query);

struct RemoteConfig {
  std::string endpoint;  // full URL of the chat-completions route
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  std::chrono::seconds timeout{120};

  // EOSCRIPT_LLM_ENDPOINT, EOSCRIPT_LLM_MODEL, EOSCRIPT_LLM_API_KEY,
  // EOSCRIPT_LLM_TEMPERATURE, EOSCRIPT_LLM_TIMEOUT_S.
  static RemoteConfig from_env();
};

class RemoteBackend : public LlmBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::string complete(const CompletionRequest& request) const override;
  std::string describe() const override { return "remote:" + config_.model; }

 private:
  RemoteConfig config_;
};

}  // namespace eoscript
