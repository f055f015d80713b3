#include "eoscript/registry.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "eoscript/digest.hpp"
#include "eoscript/subprocess.hpp"
#include "eoscript/wire.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ToolErrc code) {
  switch (code) {
    case ToolErrc::UnknownTool: return "UnknownTool";
    case ToolErrc::ArgumentMismatch: return "ArgumentMismatch";
    case ToolErrc::ToolTimeout: return "ToolTimeout";
    case ToolErrc::ToolCrashed: return "ToolCrashed";
    case ToolErrc::MalformedToolOutput: return "MalformedToolOutput";
    case ToolErrc::ToolFailed: return "ToolFailed";
    case ToolErrc::ManifestParseError: return "ManifestParseError";
    case ToolErrc::DuplicateToolName: return "DuplicateToolName";
  }
  return "ToolError";
}

ToolError::ToolError(ToolErrc code, std::string tool, const std::string& message)
    : std::runtime_error(message), code_(code), tool_(std::move(tool)) {}

Registry Registry::with_builtins() {
  Registry reg;
  for (auto& spec : builtin_tools()) reg.add(std::move(spec));
  return reg;
}

void Registry::add(ToolSpec spec) {
  spec.validate();
  if (tools_.contains(spec.name)) {
    throw ToolError(ToolErrc::DuplicateToolName, spec.name, "tool '" + spec.name + "' is already registered");
  }
  std::string name = spec.name;
  tools_.emplace(std::move(name), std::move(spec));
}

const ToolSpec* Registry::find(std::string_view name) const {
  auto it = tools_.find(name);
  return it == tools_.end() ? nullptr : &it->second;
}

std::vector<const ToolSpec*> Registry::tools() const {
  std::vector<const ToolSpec*> out;
  out.reserve(tools_.size());
  for (const auto& [name, spec] : tools_) out.push_back(&spec);
  return out;
}

Registry load_registry(const fs::path& dir) {
  Registry reg = Registry::with_builtins();
  std::error_code ec;
  if (dir.empty() || !fs::is_directory(dir, ec)) return reg;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    ToolSpec spec;
    try {
      std::ifstream in(file);
      spec = parse_manifest(json::parse(in));
      spec.validate();
    } catch (const std::exception& e) {
      throw ToolError(ToolErrc::ManifestParseError, file.filename().string(), file.string() + ": " + e.what());
    }
    reg.add(std::move(spec));
  }
  return reg;
}

namespace {

void indent_lines(std::ostringstream& out, const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << prefix << line << '\n';
}

std::string signature_line(const ToolSpec& spec) {
  std::string s = spec.name + "(";
  const auto& args = spec.signature->args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i].name;
    if (args[i].optional) s += "?";
    s += ": " + to_string(args[i].type);
  }
  if (spec.signature->variadic) s += ", ...";
  s += ")";
  if (!spec.signature->returns.empty()) s += " -> " + spec.signature->returns;
  return s;
}

}  // namespace

std::string render_tool_block(const ToolSpec& spec) {
  std::ostringstream out;
  out << "### " << spec.name << "\n";
  out << "Category: " << to_string(spec.category) << " tool\n";
  out << "General description:\n";
  indent_lines(out, spec.general_description, "  ");
  out << "Technical description:\n";
  indent_lines(out, spec.technical_description, "  ");
  if (spec.signature) {
    out << "  Signature: " << signature_line(spec) << "\n";
    for (const auto& a : spec.signature->args) {
      if (!a.description.empty()) out << "    - " << a.name << ": " << a.description << "\n";
    }
  }
  if (!spec.supported_sensors.empty()) {
    out << "Supported sensors:\n";
    for (const auto& s : spec.supported_sensors) {
      out << "  - " << s.sensor;
      if (!s.band_mapping.empty()) {
        out << " (bands:";
        for (const auto& [channel, canonical] : s.band_mapping) out << " " << channel << "->" << canonical;
        out << ")";
      }
      out << "\n    expected normalization: " << (s.normalization.empty() ? "unspecified" : s.normalization) << "\n";
    }
  }
  if (spec.usage_example) {
    out << "Usage example:\n";
    indent_lines(out, *spec.usage_example, "    ");
  }
  if (!spec.training_datasets.empty()) {
    out << "Training datasets:\n";
    for (const auto& d : spec.training_datasets) {
      out << "  - " << d.name << " taxonomy:\n";
      out << "    | id | label |\n";
      out << "    |----|-------|\n";
      for (const auto& [id, label] : d.taxonomy) out << "    | " << id << " | " << label << " |\n";
    }
  }
  return out.str();
}

std::string render_prompt_catalog(const Registry& registry) {
  std::ostringstream out;
  out << "## Available tools (" << registry.size() << ")\n\n";
  for (const auto* spec : registry.tools()) out << render_tool_block(*spec) << "\n";
  return out.str();
}

namespace {

std::optional<std::string> read_file(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return std::nullopt;
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Paths to existing files digest by content so scratch locations do not leak into records.
json string_digest(const std::string& text) {
  if (text.empty() || text.size() > 4096) return text;
  const fs::path p(text);
  auto bytes = read_file(p);
  if (!bytes) return text;
  const auto ext = p.extension().string();
  if (ext == ".json" || ext == ".bin") {
    fs::path stem = p;
    stem.replace_extension();
    const auto header = read_file(fs::path(stem).concat(".json"));
    const auto payload = read_file(fs::path(stem).concat(".bin"));
    if (header && payload) return json{{"sidecar", sha256_hex(*header + *payload)}};
  }
  return json{{"file", sha256_hex(*bytes)}};
}

json digest_encoding(const Value& v) {
  switch (v.type()) {
    case Value::Type::None: return nullptr;
    case Value::Type::Bool: return v.as_bool();
    case Value::Type::Int: return v.as_int();
    case Value::Type::Real: return format_real(v.as_real());
    case Value::Type::String: return string_digest(v.as_string());
    case Value::Type::List: {
      json arr = json::array();
      for (const auto& item : v.as_list()) arr.push_back(digest_encoding(item));
      return arr;
    }
    case Value::Type::Raster: {
      const auto& r = v.as_raster();
      std::string payload;
      for (const auto& plane : r.bands()) {
        payload.append(reinterpret_cast<const char*>(plane.data()), plane.size() * sizeof(float));
      }
      return json{{"raster", sha256_hex(payload)}, {"shape", {r.width(), r.height()}}, {"bands", r.band_names()}};
    }
    case Value::Type::Mask: {
      const auto& m = v.as_mask();
      std::string payload(reinterpret_cast<const char*>(m.values().data()), m.values().size() * sizeof(std::int32_t));
      return json{{"mask", sha256_hex(payload)}, {"shape", {m.width(), m.height()}}};
    }
  }
  return nullptr;
}

std::string tail(const std::string& text, std::size_t n = 400) {
  std::string t = text.size() > n ? text.substr(text.size() - n) : text;
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
  return t;
}

Value check_model_output(const ToolSpec& spec, Value value) {
  if (spec.category != ToolCategory::Model || !value.is(Value::Type::Mask)) return value;
  const auto taxonomy = spec.taxonomy();
  std::set<std::int32_t> seen(value.as_mask().values().begin(), value.as_mask().values().end());
  for (auto id : seen) {
    if (!taxonomy.contains(id)) {
      throw ToolError(ToolErrc::MalformedToolOutput, spec.name,
                      spec.name + " emitted class " + std::to_string(id) + " absent from its taxonomy");
    }
  }
  return value;
}

Value invoke_external(const ToolSpec& spec, const ExternalBinding& ext, std::span<const Value> args,
                      ToolContext& ctx, std::size_t call_index) {
  const fs::path call_dir =
      (ctx.scratch_dir.empty() ? fs::temp_directory_path() : ctx.scratch_dir) / ("call_" + std::to_string(call_index));
  fs::create_directories(call_dir);

  ValueEncoder encoder(call_dir / "in");
  json encoded = json::array();
  for (const auto& a : args) encoded.push_back(encoder.encode(a));
  const std::string request = make_request(spec.name, encoded).dump();

  auto timeout = std::chrono::milliseconds(static_cast<long long>(ext.timeout_s * 1000.0));
  bool limited_by_run = false;
  if (ctx.deadline != std::chrono::steady_clock::time_point::max()) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(ctx.deadline - std::chrono::steady_clock::now());
    if (remaining < timeout) {
      timeout = std::max(remaining, std::chrono::milliseconds(1));
      limited_by_run = true;
    }
  }

  ProcessOptions opts;
  opts.timeout = timeout;
  opts.working_dir = call_dir;
  opts.extra_env["EOSCRIPT_TOOL_OUTPUT_DIR"] = call_dir.string();
  ProcessResult proc;
  try {
    proc = run_process(ext.cmd, request, opts);
  } catch (const std::exception& e) {
    throw ToolError(ToolErrc::ToolCrashed, spec.name, spec.name + " could not be started: " + e.what());
  }

  if (proc.timed_out) {
    throw ToolError(ToolErrc::ToolTimeout, spec.name,
                    spec.name + " timed out after " + std::to_string(timeout.count()) + " ms" +
                        (limited_by_run ? " (run wall-clock budget)" : ""));
  }

  std::optional<ToolResponse> response;
  std::string parse_problem;
  try {
    response = parse_response(proc.stdout_data);
  } catch (const std::invalid_argument& e) {
    parse_problem = e.what();
  }

  if (response && !response->ok) throw ToolError(ToolErrc::ToolFailed, spec.name, response->message);
  if (proc.signaled || proc.exit_status != 0) {
    std::string msg = spec.name + (proc.signaled ? " killed by signal " + std::to_string(proc.term_signal)
                                                 : " exited with status " + std::to_string(proc.exit_status));
    if (!proc.stderr_data.empty()) msg += ": " + tail(proc.stderr_data);
    throw ToolError(ToolErrc::ToolCrashed, spec.name, msg);
  }
  if (!response) throw ToolError(ToolErrc::MalformedToolOutput, spec.name, spec.name + ": " + parse_problem);
  try {
    return decode_value(response->value, call_dir);
  } catch (const std::exception& e) {
    throw ToolError(ToolErrc::MalformedToolOutput, spec.name, spec.name + ": undecodable value: " + e.what());
  }
}

}  // namespace

std::string digest_args(std::span<const Value> args) {
  json arr = json::array();
  for (const auto& a : args) arr.push_back(digest_encoding(a));
  return sha256_hex(arr.dump());
}

Value invoke_tool(const Registry& registry, std::string_view name, std::span<const Value> args, ToolContext& ctx,
                  std::vector<ToolCallRecord>& log) {
  ToolCallRecord record;
  record.tool = std::string(name);
  record.start = std::chrono::system_clock::now();
  const std::size_t call_index = log.size();
  try {
    record.args_digest = digest_args(args);
    const ToolSpec* spec = registry.find(name);
    if (!spec) throw ToolError(ToolErrc::UnknownTool, std::string(name), "unknown tool '" + std::string(name) + "'");
    if (spec->signature) {
      if (auto problem = spec->signature->check(args); !problem.empty()) {
        throw ToolError(ToolErrc::ArgumentMismatch, spec->name, spec->name + ": " + problem);
      }
    }
    Value result;
    if (const auto* ext = std::get_if<ExternalBinding>(&spec->binding)) {
      result = invoke_external(*spec, *ext, args, ctx, call_index);
    } else {
      try {
        result = std::get<BuiltinFn>(spec->binding)(args, ctx);
      } catch (const ToolError&) {
        throw;
      } catch (const std::exception& e) {
        throw ToolError(ToolErrc::ToolFailed, spec->name, e.what());
      }
    }
    result = check_model_output(*spec, std::move(result));
    record.stop = std::chrono::system_clock::now();
    record.ok = true;
    record.output_summary = summarize(result);
    log.push_back(std::move(record));
    return result;
  } catch (const ToolError& e) {
    record.stop = std::chrono::system_clock::now();
    record.ok = false;
    record.error = e.what();
    record.output_summary = "error";
    log.push_back(std::move(record));
    throw;
  }
}

}  // namespace eoscript
