#pragma once

// Audit log of one query, persisted as JSON (see docs/run_record.md).

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eoscript/script/interpreter.hpp"
#include "eoscript/script/validator.hpp"
#include "eoscript/tool_spec.hpp"

namespace eoscript {

enum class OutcomeStatus { Success, ValidationFailure, RuntimeError };

std::string to_string(OutcomeStatus status);
OutcomeStatus parse_outcome_status(const std::string& text);

struct Outcome {
  OutcomeStatus status = OutcomeStatus::Success;
  std::string kind;     // e.g. NameError, ToolError, ResourceLimit, BackendUnavailable
  std::string detail;   // tool error code or exhausted limit
  std::string message;  // verbatim error text
};

struct Attempt {
  std::string prompt_digest;
  std::string completion;  // raw backend text
  std::string script;      // after fence stripping
  bool fences_stripped = false;
  script::Verdict verdict;
};

struct RunRecord {
  std::string id;
  std::string query;
  std::vector<std::string> attachments;
  std::string backend;
  std::string prompt_digest;
  std::chrono::system_clock::time_point started_at;
  std::chrono::system_clock::time_point finished_at;
  std::vector<Attempt> attempts;
  std::string script;  // the code that was (or would have been) executed
  script::Verdict verdict;
  std::vector<ToolCallRecord> tool_calls;
  std::vector<std::string> output;
  std::vector<std::string> artifacts;
  Outcome outcome;
  script::ResourceUsage resources;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const script::Verdict& verdict);
script::Verdict verdict_from_json(const nlohmann::json& doc);

// Drops the run id, timestamps and durations, and replaces the id inside strings,
// leaving only what must be identical between repeated runs.
nlohmann::json comparable_view(const RunRecord& record);

// Sortable unique id, e.g. 20260102T030405Z-1a2b3c4d.
std::string new_run_id();

}  // namespace eoscript
