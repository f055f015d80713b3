#pragma once

// Dataset-level evaluation: final answers through the full controller, LLM-level
// rates over run records, and file-based tool-level scoring.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eoscript/controller.hpp"
#include "eoscript/eval/obb.hpp"

namespace eoscript::eval {

enum class Scenario { LandCover, WildfireBurn, WildfireObjects };

std::string to_string(Scenario scenario);
std::optional<Scenario> parse_scenario(const std::string& text);

struct EvalQuestion {
  std::string id;
  std::string query;
  std::vector<std::filesystem::path> attachments;  // resolved against the dataset's directory
  std::string expected;
  Scenario scenario = Scenario::LandCover;
};

// JSON lines; blank lines skipped. Throws EvalError(DatasetParseError) with the line number.
std::vector<EvalQuestion> load_dataset(const std::filesystem::path& path);

struct QuestionVerdict {
  std::string id;
  Scenario scenario;
  std::string expected;
  std::string actual;  // last printed line, empty when nothing was printed
  bool correct = false;
  std::string run_id;
  std::string outcome;
};

struct ScenarioScore {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct FinalAnswerReport {
  std::map<Scenario, ScenarioScore> scenarios;
  std::vector<QuestionVerdict> verdicts;  // sorted by question id
  std::vector<RunRecord> records;         // same order as verdicts
};

// Counting questions (WildfireObjects) use exact match; the rest allow 1% numeric tolerance.
bool score_question(const EvalQuestion& q, const std::string& actual);

// Throws EvalError(EmptyInput) for an empty dataset.
FinalAnswerReport eval_final_answers(const std::vector<EvalQuestion>& dataset, const Registry& registry,
                                     const LlmBackend& backend, const ControllerConfig& config,
                                     std::size_t concurrency = 4);

struct LlmLevelReport {
  std::size_t runs = 0;
  std::size_t valid = 0;
  std::size_t succeeded = 0;
  double code_validity_rate = 0.0;
  double execution_success_rate = 0.0;
};

// Throws EvalError(EmptyInput).
LlmLevelReport eval_llm_level(const std::vector<RunRecord>& records);

// Every *.json run record in `dir`, sorted by file name.
std::vector<RunRecord> load_run_records(const std::filesystem::path& dir);

// Detection file: {"image": ..., "boxes": [{cx, cy, w, h, angle, class, score?}]}.
std::vector<ObbDetection> load_detections(const std::filesystem::path& path);

// Labels file: JSON list of class ids, or {"labels": [...]}.
std::vector<int> load_labels(const std::filesystem::path& path);

// task: cls | seg | det | burn. Returns a JSON summary for the report.
nlohmann::json eval_tool_task(const std::string& task, const std::filesystem::path& pred,
                              const std::filesystem::path& truth, int num_classes = 0);

nlohmann::json to_json(const FinalAnswerReport& report);
nlohmann::json to_json(const LlmLevelReport& report);

// Plain-text tables: Task/Dataset/Metric/Score, Scenario/Accuracy, Metric/Rate.
std::string render_tool_table(const std::vector<nlohmann::json>& tool_results);
std::string render_final_table(const FinalAnswerReport& report);
std::string render_llm_table(const LlmLevelReport& report);

}  // namespace eoscript::eval
