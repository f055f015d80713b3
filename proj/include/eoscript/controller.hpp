#pragma once

// Turns a natural-language query into a checked, executed script:
// prompt -> completion -> fence strip -> parse/validate (with bounded retries)
// -> execute -> RunRecord.

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "eoscript/llm_backend.hpp"
#include "eoscript/registry.hpp"
#include "eoscript/run_record.hpp"
#include "eoscript/script/interpreter.hpp"

namespace eoscript {

enum class ControllerErrc { EmptyQuery };

class ControllerError : public std::runtime_error {
 public:
  ControllerError(ControllerErrc code, const std::string& message);
  ControllerErrc code() const noexcept { return code_; }

 private:
  ControllerErrc code_;
};

// The two contract sentences, also quoted in docs/backend.md.
inline constexpr const char* kContractCodeOnly =
    "Output only runnable code, without any prose, markdown, or explanations.";
inline constexpr const char* kContractPrintResult = "The program must always print a final result.";

struct PromptBundle {
  std::string system_text;
  std::string catalog_text;
  std::string user_query;
  std::vector<std::string> attachments;  // upload file names, in index order
};

// Throws ControllerError(EmptyQuery) for a blank query.
PromptBundle build_prompt(const Registry& registry, const std::string& query,
                          const std::vector<std::string>& attachments);

// Feedback is the previous completion plus validator diagnostics; empty on the first attempt.
struct RetryFeedback {
  std::string previous_completion;
  std::string diagnostics;
};

std::vector<ChatMessage> prompt_messages(const PromptBundle& bundle, const std::vector<RetryFeedback>& feedback = {});
std::string messages_digest(const std::vector<ChatMessage>& messages);

struct GeneratedCode {
  std::string completion;  // raw backend text
  std::string code;        // fences removed
  bool fences_stripped = false;
  std::string origin = "llm";
  std::string prompt_digest;
};

// Throws BackendError (Unavailable, EmptyCompletion).
GeneratedCode generate_code(const LlmBackend& backend, const PromptBundle& bundle,
                            const std::vector<RetryFeedback>& feedback = {});

struct ControllerConfig {
  int max_retries = 1;
  script::Limits limits;
  // Each run gets <work_root>/<run id>/{scratch,artifacts}.
  std::filesystem::path work_root = std::filesystem::temp_directory_path() / "eoscript-runs";
  std::shared_ptr<const SceneProvider> scenes;
  bool keep_scratch = false;
};

// Never throws for query-level failures; they are encoded in the outcome.
RunRecord handle_query(const Registry& registry, const LlmBackend& backend, const std::string& query,
                       const std::vector<std::filesystem::path>& attachments, const ControllerConfig& config);

}  // namespace eoscript
