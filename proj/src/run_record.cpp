#include "eoscript/run_record.hpp"

#include <random>
#include <stdexcept>

namespace eoscript {
using nlohmann::json;

std::string to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::Success: return "success";
    case OutcomeStatus::ValidationFailure: return "validation_failure";
    case OutcomeStatus::RuntimeError: return "runtime_error";
  }
  return "runtime_error";
}

OutcomeStatus parse_outcome_status(const std::string& text) {
  if (text == "success") return OutcomeStatus::Success;
  if (text == "validation_failure") return OutcomeStatus::ValidationFailure;
  if (text == "runtime_error") return OutcomeStatus::RuntimeError;
  throw std::invalid_argument("unknown outcome status '" + text + "'");
}

json to_json(const script::Verdict& v) {
  json diags = json::array();
  for (const auto& d : v.diagnostics) {
    diags.push_back({{"line", d.span.line},
                     {"col", d.span.col},
                     {"end_line", d.span.end_line},
                     {"end_col", d.span.end_col},
                     {"message", d.message}});
  }
  return {{"syntactically_valid", v.syntactically_valid}, {"calls_valid", v.calls_valid}, {"diagnostics", diags}};
}

script::Verdict verdict_from_json(const json& doc) {
  script::Verdict v;
  v.syntactically_valid = doc.at("syntactically_valid").get<bool>();
  v.calls_valid = doc.at("calls_valid").get<bool>();
  for (const auto& d : doc.at("diagnostics")) {
    v.diagnostics.push_back({script::Span{d.at("line").get<int>(), d.at("col").get<int>(),
                                          d.value("end_line", d.at("line").get<int>()),
                                          d.value("end_col", d.at("col").get<int>())},
                             d.at("message").get<std::string>()});
  }
  return v;
}

json to_json(const RunRecord& r) {
  json attempts = json::array();
  for (const auto& a : r.attempts) {
    attempts.push_back({{"prompt_digest", a.prompt_digest},
                        {"completion", a.completion},
                        {"script", a.script},
                        {"fences_stripped", a.fences_stripped},
                        {"verdict", to_json(a.verdict)}});
  }
  json calls = json::array();
  for (const auto& c : r.tool_calls) calls.push_back(to_json(c));
  json outcome{{"status", to_string(r.outcome.status)}};
  if (r.outcome.status != OutcomeStatus::Success) {
    outcome["kind"] = r.outcome.kind;
    outcome["message"] = r.outcome.message;
    if (!r.outcome.detail.empty()) outcome["detail"] = r.outcome.detail;
  }
  return {{"id", r.id},
          {"query", r.query},
          {"attachments", r.attachments},
          {"backend", r.backend},
          {"prompt_digest", r.prompt_digest},
          {"started_at", format_timestamp(r.started_at)},
          {"finished_at", format_timestamp(r.finished_at)},
          {"attempts", attempts},
          {"script", r.script},
          {"verdict", to_json(r.verdict)},
          {"tool_calls", calls},
          {"output", r.output},
          {"artifacts", r.artifacts},
          {"outcome", outcome},
          {"resources",
           {{"steps", r.resources.steps},
            {"wall_ms", r.resources.wall_ms},
            {"peak_value_store_bytes", r.resources.peak_value_store_bytes},
            {"tool_calls", r.resources.tool_calls}}}};
}

RunRecord run_record_from_json(const json& doc) {
  RunRecord r;
  r.id = doc.at("id").get<std::string>();
  r.query = doc.at("query").get<std::string>();
  r.attachments = doc.value("attachments", std::vector<std::string>{});
  r.backend = doc.value("backend", std::string());
  r.prompt_digest = doc.value("prompt_digest", std::string());
  r.started_at = parse_timestamp(doc.at("started_at").get<std::string>());
  r.finished_at = parse_timestamp(doc.at("finished_at").get<std::string>());
  for (const auto& a : doc.at("attempts")) {
    r.attempts.push_back(Attempt{a.value("prompt_digest", std::string()), a.at("completion").get<std::string>(),
                                 a.at("script").get<std::string>(), a.value("fences_stripped", false),
                                 verdict_from_json(a.at("verdict"))});
  }
  r.script = doc.at("script").get<std::string>();
  r.verdict = verdict_from_json(doc.at("verdict"));
  for (const auto& c : doc.at("tool_calls")) r.tool_calls.push_back(tool_call_from_json(c));
  r.output = doc.at("output").get<std::vector<std::string>>();
  r.artifacts = doc.value("artifacts", std::vector<std::string>{});
  const auto& o = doc.at("outcome");
  r.outcome.status = parse_outcome_status(o.at("status").get<std::string>());
  r.outcome.kind = o.value("kind", std::string());
  r.outcome.message = o.value("message", std::string());
  r.outcome.detail = o.value("detail", std::string());
  if (doc.contains("resources")) {
    const auto& res = doc["resources"];
    r.resources.steps = res.value("steps", std::uint64_t{0});
    r.resources.wall_ms = res.value("wall_ms", std::int64_t{0});
    r.resources.peak_value_store_bytes = res.value("peak_value_store_bytes", std::size_t{0});
    r.resources.tool_calls = res.value("tool_calls", std::size_t{0});
  }
  return r;
}

namespace {

void scrub_id(json& node, const std::string& id) {
  if (node.is_string()) {
    auto s = node.get<std::string>();
    for (auto pos = s.find(id); pos != std::string::npos; pos = s.find(id, pos + 4)) s.replace(pos, id.size(), "<id>");
    node = s;
  } else if (node.is_array() || node.is_object()) {
    for (auto& child : node) scrub_id(child, id);
  }
}

}  // namespace

json comparable_view(const RunRecord& record) {
  json doc = to_json(record);
  doc.erase("id");
  doc.erase("started_at");
  doc.erase("finished_at");
  doc["resources"].erase("wall_ms");
  for (auto& call : doc["tool_calls"]) {
    call.erase("start");
    call.erase("stop");
  }
  if (!record.id.empty()) scrub_id(doc, record.id);
  return doc;
}

std::string new_run_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  const auto now = std::chrono::system_clock::now();
  std::string ts = format_timestamp(now);  // 2026-01-02T03:04:05.678Z
  std::string compact;
  for (char c : ts) {
    if (c != '-' && c != ':' && c != '.') compact += c;
  }
  char suffix[9];
  std::snprintf(suffix, sizeof suffix, "%08x", static_cast<unsigned>(rng() & 0xFFFFFFFFU));
  return compact + "-" + suffix;
}

}  // namespace eoscript
