#include "eoscript/controller.hpp"

#include <json.hpp>

#include "eoscript/digest.hpp"
#include "eoscript/script/parser.hpp"
#include "eoscript/script/validator.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

ControllerError::ControllerError(ControllerErrc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

namespace {

const char* const kDialectNotes =
    "Write a short program in the tool-script language: one statement per line, either `name = expression` "
    "or a bare expression. Expressions use integers, reals, double-quoted strings, True, False, lists in "
    "brackets, calls to the tools listed below, indexing with [i], arithmetic + - * /, comparisons "
    "== != < <= > >= and membership `x in mask`. Masks support .sum(), .mean() and .count(); `mask == k` gives "
    "a boolean mask. The only other functions are print, len, round and abs. There are no imports, loops, "
    "function definitions, keyword arguments or attribute access. Do not define names that clash with tools.";

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

PromptBundle build_prompt(const Registry& registry, const std::string& query,
                          const std::vector<std::string>& attachments) {
  if (blank(query)) throw ControllerError(ControllerErrc::EmptyQuery, "query is empty");
  PromptBundle b;
  b.system_text = std::string("You answer Earth observation questions by writing code that calls tools.\n") +
                  kContractCodeOnly + "\n" + kContractPrintResult + "\n\n" + kDialectNotes + "\n";
  b.catalog_text = render_prompt_catalog(registry);
  b.user_query = query;
  b.attachments = attachments;
  return b;
}

std::vector<ChatMessage> prompt_messages(const PromptBundle& bundle, const std::vector<RetryFeedback>& feedback) {
  std::vector<ChatMessage> messages;
  messages.push_back({"system", bundle.system_text + "\n" + bundle.catalog_text});
  std::string user = bundle.user_query;
  if (!bundle.attachments.empty()) {
    user += "\n\nUploaded files (retrieve paths with get_uploaded_image_path(index) for images or "
            "get_uploaded_file_path(index) for any file):\n";
    for (std::size_t i = 0; i < bundle.attachments.size(); ++i) {
      user += "- index " + std::to_string(i) + ": " + bundle.attachments[i] + "\n";
    }
  }
  messages.push_back({"user", user});
  for (const auto& f : feedback) {
    messages.push_back({"assistant", f.previous_completion});
    messages.push_back({"user", "That program was rejected before execution:\n" + f.diagnostics +
                                    "\nReply with the corrected program only."});
  }
  return messages;
}

std::string messages_digest(const std::vector<ChatMessage>& messages) {
  json doc = json::array();
  for (const auto& m : messages) doc.push_back({{"role", m.role}, {"content", m.content}});
  return sha256_hex(doc.dump());
}

GeneratedCode generate_code(const LlmBackend& backend, const PromptBundle& bundle,
                            const std::vector<RetryFeedback>& feedback) {
  CompletionRequest request;
  request.messages = prompt_messages(bundle, feedback);
  request.query = bundle.user_query;
  request.attempt = static_cast<int>(feedback.size());
  GeneratedCode out;
  out.prompt_digest = messages_digest(request.messages);
  out.completion = backend.complete(request);
  if (blank(out.completion)) throw BackendError(BackendErrc::EmptyCompletion, "backend returned an empty completion");
  auto stripped = script::strip_code_fences(out.completion);
  out.code = std::move(stripped.code);
  out.fences_stripped = stripped.stripped;
  return out;
}

RunRecord handle_query(const Registry& registry, const LlmBackend& backend, const std::string& query,
                       const std::vector<fs::path>& attachments, const ControllerConfig& config) {
  RunRecord record;
  record.id = new_run_id();
  record.query = query;
  record.backend = backend.describe();
  record.started_at = std::chrono::system_clock::now();
  for (const auto& a : attachments) record.attachments.push_back(a.filename().string());

  auto finish = [&](OutcomeStatus status, std::string kind, std::string message, std::string detail = {}) {
    record.outcome = Outcome{status, std::move(kind), std::move(detail), std::move(message)};
    record.finished_at = std::chrono::system_clock::now();
    return record;
  };

  PromptBundle bundle;
  try {
    bundle = build_prompt(registry, query, record.attachments);
  } catch (const ControllerError& e) {
    return finish(OutcomeStatus::ValidationFailure, "EmptyQuery", e.what());
  }
  record.prompt_digest = messages_digest(prompt_messages(bundle));

  std::vector<RetryFeedback> feedback;
  const int max_attempts = 1 + std::max(config.max_retries, 0);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Attempt a;
    try {
      auto gen = generate_code(backend, bundle, feedback);
      a.prompt_digest = gen.prompt_digest;
      a.completion = std::move(gen.completion);
      a.script = std::move(gen.code);
      a.fences_stripped = gen.fences_stripped;
      a.verdict = script::check_source(a.script, registry);
    } catch (const BackendError& e) {
      if (e.code() == BackendErrc::Unavailable) {
        return finish(OutcomeStatus::RuntimeError, "BackendUnavailable", e.what());
      }
      a.prompt_digest = messages_digest(prompt_messages(bundle, feedback));
      a.verdict.syntactically_valid = false;
      a.verdict.calls_valid = false;
      a.verdict.diagnostics.push_back({script::Span{1, 1, 1, 1}, std::string("EmptyCompletion: ") + e.what()});
    }
    record.attempts.push_back(a);
    if (a.verdict.calls_valid) break;
    feedback.push_back({a.completion, script::format_diagnostics(a.verdict.diagnostics)});
  }

  const Attempt& last = record.attempts.back();
  record.script = last.script;
  record.verdict = last.verdict;
  if (!last.verdict.calls_valid) {
    return finish(OutcomeStatus::ValidationFailure, last.verdict.syntactically_valid ? "InvalidCalls" : "SyntaxError",
                  script::format_diagnostics(last.verdict.diagnostics));
  }

  script::ExecutionContext ctx;
  ctx.attachments = attachments;
  const fs::path run_dir = config.work_root / record.id;
  ctx.scratch_dir = run_dir / "scratch";
  ctx.artifact_dir = run_dir / "artifacts";
  ctx.scenes = config.scenes;
  ctx.limits = config.limits;
  std::error_code ec;
  fs::create_directories(ctx.scratch_dir, ec);
  fs::create_directories(ctx.artifact_dir, ec);

  const auto program = script::parse_program(record.script);
  auto result = script::execute_program(program, registry, ctx);
  if (!config.keep_scratch) fs::remove_all(ctx.scratch_dir, ec);

  record.tool_calls = std::move(result.tool_calls);
  record.output = std::move(result.output);
  record.artifacts = std::move(result.artifacts);
  record.resources = result.resources;
  if (result.success) return finish(OutcomeStatus::Success, "", "");
  const auto& err = *result.error;
  return finish(OutcomeStatus::RuntimeError, std::string(script::to_string(err.kind())), err.what(), err.detail());
}

}  // namespace eoscript
