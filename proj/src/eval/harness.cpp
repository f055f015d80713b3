#include "eoscript/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "eoscript/eval/metrics.hpp"
#include "eoscript/raster_io.hpp"
#include "eoscript/value.hpp"

namespace eoscript::eval {
namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::LandCover: return "land_cover";
    case Scenario::WildfireBurn: return "wildfire_burn";
    case Scenario::WildfireObjects: return "wildfire_objects";
  }
  return "land_cover";
}

std::optional<Scenario> parse_scenario(const std::string& text) {
  if (text == "land_cover") return Scenario::LandCover;
  if (text == "wildfire_burn") return Scenario::WildfireBurn;
  if (text == "wildfire_objects") return Scenario::WildfireObjects;
  return std::nullopt;
}

namespace {

std::string expected_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "True" : "False";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_real(v.get<double>());
  throw std::invalid_argument("expected answer must be text, a number or a boolean");
}

std::string last_line(const std::vector<std::string>& output) {
  for (auto it = output.rbegin(); it != output.rend(); ++it) {
    if (it->find_first_not_of(" \t\r\n") != std::string::npos) return *it;
  }
  return {};
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string c = i < cells.size() ? cells[i] : "";
      out += (i == 0 ? "" : "  ") + c + std::string(width[i] - c.size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace

std::vector<EvalQuestion> load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError(EvalErrc::DatasetParseError, "cannot open dataset " + path.string());
  std::vector<EvalQuestion> out;
  std::string line;
  int line_no = 0;
  std::optional<Scenario> file_scenario;
  const fs::path base = path.parent_path();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const json doc = json::parse(line);
      EvalQuestion q;
      q.id = doc.at("id").get<std::string>();
      q.query = doc.at("query").get<std::string>();
      q.expected = expected_text(doc.at("expected"));
      if (q.expected.empty()) throw std::invalid_argument("expected answer is empty");
      const auto scenario = parse_scenario(doc.at("scenario").get<std::string>());
      if (!scenario) throw std::invalid_argument("unknown scenario '" + doc["scenario"].get<std::string>() + "'");
      if (file_scenario && *file_scenario != *scenario) throw std::invalid_argument("mixed scenarios in one dataset");
      file_scenario = scenario;
      q.scenario = *scenario;
      for (const auto& a : doc.value("attachments", json::array())) {
        fs::path p = a.get<std::string>();
        q.attachments.push_back(p.is_absolute() ? p : base / p);
      }
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw EvalError(EvalErrc::DatasetParseError, where + e.what());
    }
  }
  return out;
}

bool score_question(const EvalQuestion& q, const std::string& actual) {
  return score_answer(q.expected, actual, q.scenario == Scenario::WildfireObjects ? 0.0 : 0.01);
}

FinalAnswerReport eval_final_answers(const std::vector<EvalQuestion>& dataset, const Registry& registry,
                                     const LlmBackend& backend, const ControllerConfig& config,
                                     std::size_t concurrency) {
  if (dataset.empty()) throw EvalError(EvalErrc::EmptyInput, "dataset has no questions");
  std::vector<std::optional<RunRecord>> records(dataset.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      try {
        records[i] = handle_query(registry, backend, dataset[i].query, dataset[i].attachments, config);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(concurrency, 1, dataset.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dataset[a].id < dataset[b].id; });

  FinalAnswerReport report;
  for (auto i : order) {
    const auto& q = dataset[i];
    auto& rec = *records[i];
    QuestionVerdict v{q.id, q.scenario, q.expected, last_line(rec.output), false, rec.id,
                      to_string(rec.outcome.status)};
    v.correct = rec.outcome.status == OutcomeStatus::Success && score_question(q, v.actual);
    auto& s = report.scenarios[q.scenario];
    ++s.total;
    s.correct += v.correct ? 1 : 0;
    report.verdicts.push_back(std::move(v));
    report.records.push_back(std::move(rec));
  }
  return report;
}

LlmLevelReport eval_llm_level(const std::vector<RunRecord>& records) {
  if (records.empty()) throw EvalError(EvalErrc::EmptyInput, "no run records");
  LlmLevelReport r;
  r.runs = records.size();
  for (const auto& rec : records) {
    r.valid += rec.verdict.calls_valid ? 1 : 0;
    r.succeeded += rec.outcome.status == OutcomeStatus::Success ? 1 : 0;
  }
  r.code_validity_rate = static_cast<double>(r.valid) / static_cast<double>(r.runs);
  r.execution_success_rate = static_cast<double>(r.succeeded) / static_cast<double>(r.runs);
  return r;
}

std::vector<RunRecord> load_run_records(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw EvalError(EvalErrc::EmptyInput, "run directory " + dir.string() + " not found");
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      out.push_back(run_record_from_json(json::parse(in)));
    } catch (const std::exception& e) {
      throw EvalError(EvalErrc::DatasetParseError, f.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<ObbDetection> load_detections(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError(EvalErrc::DatasetParseError, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    const json& boxes = doc.is_array() ? doc : doc.at("boxes");
    std::vector<ObbDetection> out;
    for (const auto& b : boxes) {
      if (b.is_array()) {
        // [cx, cy, w, h, angle, class, score]
        out.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>(),
                       b.at(4).get<double>(), b.at(5).get<int>(), b.size() > 6 ? b.at(6).get<double>() : 1.0});
      } else {
        out.push_back({b.at("cx").get<double>(), b.at("cy").get<double>(), b.at("w").get<double>(),
                       b.at("h").get<double>(), b.at("angle").get<double>(), b.at("class").get<int>(),
                       b.value("score", 1.0)});
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw EvalError(EvalErrc::DatasetParseError, path.string() + ": " + e.what());
  }
}

std::vector<int> load_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError(EvalErrc::DatasetParseError, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    return (doc.is_array() ? doc : doc.at("labels")).get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw EvalError(EvalErrc::DatasetParseError, path.string() + ": " + e.what());
  }
}

json eval_tool_task(const std::string& task, const fs::path& pred, const fs::path& truth, int num_classes) {
  if (task == "cls") {
    const auto p = load_labels(pred);
    const auto t = load_labels(truth);
    return {{"task", "Classification"}, {"metric", "Top-1"}, {"score", top1_accuracy(p, t)}, {"count", t.size()}};
  }
  if (task == "seg") {
    const auto r = miou(load_mask(pred), load_mask(truth), num_classes);
    json per = json::object();
    for (const auto& [cls, iou] : r.per_class) per[std::to_string(cls)] = iou;
    return {{"task", "Segmentation"}, {"metric", "mIoU"}, {"score", r.mean}, {"per_class", per}};
  }
  if (task == "burn") {
    return {{"task", "Burn-scar"}, {"metric", "IoU (burned)"}, {"score", binary_iou(load_mask(pred), load_mask(truth))}};
  }
  if (task == "det") {
    const auto r = map50(load_detections(pred), load_detections(truth));
    json per = json::object();
    for (const auto& [cls, ap] : r.per_class_ap) per[std::to_string(cls)] = ap;
    json out{{"task", "Detection"}, {"metric", "mAP@50"}, {"per_class", per}};
    out["score"] = r.map ? json(*r.map) : json(nullptr);
    return out;
  }
  throw std::invalid_argument("unknown task '" + task + "' (expected cls, seg, det or burn)");
}

json to_json(const FinalAnswerReport& report) {
  json scenarios = json::object();
  for (const auto& [s, score] : report.scenarios) {
    scenarios[to_string(s)] = {{"correct", score.correct}, {"total", score.total}, {"accuracy", score.accuracy()}};
  }
  json verdicts = json::array();
  for (const auto& v : report.verdicts) {
    verdicts.push_back({{"id", v.id},
                        {"scenario", to_string(v.scenario)},
                        {"expected", v.expected},
                        {"actual", v.actual},
                        {"correct", v.correct},
                        {"run_id", v.run_id},
                        {"outcome", v.outcome}});
  }
  return {{"final_answer_accuracy", scenarios}, {"verdicts", verdicts}};
}

json to_json(const LlmLevelReport& r) {
  return {{"runs", r.runs},
          {"valid", r.valid},
          {"succeeded", r.succeeded},
          {"code_validity_rate", r.code_validity_rate},
          {"execution_success_rate", r.execution_success_rate}};
}

std::string render_tool_table(const std::vector<json>& results) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results) {
    const std::string score = r.at("score").is_null() ? "n/a" : fmt(100.0 * r.at("score").get<double>(), 1);
    rows.push_back({r.value("task", ""), r.value("dataset", "-"), r.value("metric", "") + " (%)", score});
  }
  return table({"Task", "Dataset", "Metric", "Score"}, rows);
}

std::string render_final_table(const FinalAnswerReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [s, score] : report.scenarios) {
    rows.push_back({to_string(s), std::to_string(score.correct) + "/" + std::to_string(score.total),
                    fmt(100.0 * score.accuracy(), 1)});
  }
  return table({"Scenario", "Correct", "Accuracy (%)"}, rows);
}

std::string render_llm_table(const LlmLevelReport& r) {
  return table({"Metric", "Count", "Rate (%)"},
               {{"Valid code", std::to_string(r.valid) + "/" + std::to_string(r.runs), fmt(100.0 * r.code_validity_rate, 1)},
                {"Executed successfully", std::to_string(r.succeeded) + "/" + std::to_string(r.runs),
                 fmt(100.0 * r.execution_success_rate, 1)}});
}

}  // namespace eoscript::eval
