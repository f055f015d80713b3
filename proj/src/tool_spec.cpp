#include "eoscript/tool_spec.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

namespace eoscript {
using nlohmann::json;

std::string to_string(ToolCategory category) { return category == ToolCategory::Data ? "data" : "model"; }

std::string to_string(ArgType type) {
  switch (type) {
    case ArgType::Any: return "any";
    case ArgType::Int: return "int";
    case ArgType::Number: return "number";
    case ArgType::String: return "string";
    case ArgType::Bool: return "bool";
    case ArgType::List: return "list";
    case ArgType::Raster: return "raster";
    case ArgType::Mask: return "mask";
    case ArgType::Image: return "image";
    case ArgType::Grid: return "grid";
  }
  return "any";
}

std::optional<ArgType> parse_arg_type(std::string_view text) {
  for (auto t : {ArgType::Any, ArgType::Int, ArgType::Number, ArgType::String, ArgType::Bool, ArgType::List,
                 ArgType::Raster, ArgType::Mask, ArgType::Image, ArgType::Grid}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

bool arg_type_accepts(ArgType type, const Value& value) {
  using T = Value::Type;
  switch (type) {
    case ArgType::Any: return true;
    case ArgType::Int: return value.is(T::Int);
    case ArgType::Number: return value.is_number();
    case ArgType::String: return value.is(T::String);
    case ArgType::Bool: return value.is(T::Bool);
    case ArgType::List: return value.is(T::List);
    case ArgType::Raster: return value.is(T::Raster);
    case ArgType::Mask: return value.is(T::Mask);
    case ArgType::Image: return value.is(T::String) || value.is(T::Raster);
    case ArgType::Grid: return value.is(T::Raster) || value.is(T::Mask);
  }
  return false;
}

std::size_t Signature::min_arity() const {
  std::size_t n = 0;
  for (const auto& a : args) {
    if (!a.optional) ++n;
  }
  return n;
}

std::optional<std::size_t> Signature::max_arity() const {
  if (variadic) return std::nullopt;
  return args.size();
}

std::string Signature::check(std::span<const Value> values) const {
  if (values.size() < min_arity()) {
    return "expected at least " + std::to_string(min_arity()) + " argument(s), got " + std::to_string(values.size());
  }
  if (auto max = max_arity(); max && values.size() > *max) {
    return "expected at most " + std::to_string(*max) + " argument(s), got " + std::to_string(values.size());
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const ArgSpec& spec = i < args.size() ? args[i] : args.back();
    if (!arg_type_accepts(spec.type, values[i])) {
      return "argument " + std::to_string(i + 1) + " ('" + spec.name + "') must be " + to_string(spec.type) +
             ", got " + type_name(values[i].type());
    }
  }
  return {};
}

bool is_valid_tool_name(std::string_view name) {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  for (char c : name) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

void ToolSpec::validate() const {
  if (!is_valid_tool_name(name)) throw std::invalid_argument("tool name '" + name + "' must match [a-z][a-z0-9_]*");
  if (general_description.empty()) throw std::invalid_argument(name + ": general description is required");
  if (technical_description.empty()) throw std::invalid_argument(name + ": technical description is required");
  const bool has_model_sections = !supported_sensors.empty() || usage_example || !training_datasets.empty();
  if (category == ToolCategory::Model) {
    if (supported_sensors.empty()) throw std::invalid_argument(name + ": model tools must list supported sensors");
    if (!usage_example || usage_example->empty()) throw std::invalid_argument(name + ": model tools need a usage example");
    if (training_datasets.empty()) throw std::invalid_argument(name + ": model tools must list training datasets");
    for (const auto& d : training_datasets) {
      if (d.taxonomy.empty()) throw std::invalid_argument(name + ": dataset " + d.name + " has an empty taxonomy");
    }
  } else if (has_model_sections) {
    throw std::invalid_argument(name + ": data tools must not carry sensor, usage or training sections");
  }
  if (signature && signature->variadic && signature->args.empty()) {
    throw std::invalid_argument(name + ": a variadic signature needs at least one argument spec");
  }
  if (const auto* ext = std::get_if<ExternalBinding>(&binding)) {
    if (ext->cmd.empty()) throw std::invalid_argument(name + ": external binding needs a command");
    if (!(ext->timeout_s > 0)) throw std::invalid_argument(name + ": external timeout must be positive");
  } else if (!std::get<BuiltinFn>(binding)) {
    throw std::invalid_argument(name + ": builtin binding has no implementation");
  }
}

std::map<int, std::string> ToolSpec::taxonomy() const {
  std::map<int, std::string> out;
  for (const auto& d : training_datasets) out.insert(d.taxonomy.begin(), d.taxonomy.end());
  return out;
}

namespace {

const json& require(const json& doc, const char* key, json::value_t type, const char* what) {
  if (!doc.contains(key)) throw ManifestError(std::string("missing field '") + key + "'");
  const auto& v = doc.at(key);
  const bool ok = type == json::value_t::number_float ? v.is_number() : v.type() == type;
  if (!ok) throw ManifestError(std::string("field '") + key + "' must be " + what);
  return v;
}

std::map<int, std::string> parse_taxonomy(const json& doc) {
  std::map<int, std::string> out;
  if (!doc.is_object()) throw ManifestError("taxonomy must be an object of id -> label");
  for (const auto& [key, label] : doc.items()) {
    if (!label.is_string()) throw ManifestError("taxonomy labels must be strings");
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != key.size()) throw ManifestError("taxonomy key '" + key + "' is not an integer");
    out[id] = label.get<std::string>();
  }
  return out;
}

json taxonomy_json(const std::map<int, std::string>& taxonomy) {
  json out = json::object();
  for (const auto& [id, label] : taxonomy) out[std::to_string(id)] = label;
  return out;
}

}  // namespace

ToolSpec parse_manifest(const json& doc) {
  if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");
  ToolSpec spec;
  spec.name = require(doc, "name", json::value_t::string, "a string").get<std::string>();
  const auto category = require(doc, "category", json::value_t::string, "a string").get<std::string>();
  if (category == "data") {
    spec.category = ToolCategory::Data;
  } else if (category == "model") {
    spec.category = ToolCategory::Model;
  } else {
    throw ManifestError("category must be \"data\" or \"model\"");
  }
  spec.general_description = require(doc, "general_description", json::value_t::string, "a string").get<std::string>();

  if (!doc.contains("technical_description")) throw ManifestError("missing field 'technical_description'");
  const auto& tech = doc["technical_description"];
  if (tech.is_string()) {
    spec.technical_description = tech.get<std::string>();
  } else if (tech.is_object()) {
    spec.technical_description = require(tech, "text", json::value_t::string, "a string").get<std::string>();
    Signature sig;
    if (tech.contains("args")) {
      if (!tech["args"].is_array()) throw ManifestError("technical_description.args must be an array");
      for (const auto& a : tech["args"]) {
        ArgSpec arg;
        arg.name = require(a, "name", json::value_t::string, "a string").get<std::string>();
        auto type = parse_arg_type(a.value("type", std::string("any")));
        if (!type) throw ManifestError("unknown argument type for '" + arg.name + "'");
        arg.type = *type;
        arg.optional = a.value("optional", false);
        arg.description = a.value("description", std::string());
        sig.args.push_back(std::move(arg));
      }
    }
    sig.returns = tech.value("returns", std::string());
    sig.variadic = tech.value("variadic", false);
    spec.signature = std::move(sig);
  } else {
    throw ManifestError("technical_description must be a string or an object");
  }

  if (doc.contains("supported_sensors")) {
    if (!doc["supported_sensors"].is_array()) throw ManifestError("supported_sensors must be an array");
    for (const auto& s : doc["supported_sensors"]) {
      SensorSupport sensor;
      sensor.sensor = require(s, "sensor", json::value_t::string, "a string").get<std::string>();
      if (s.contains("band_mapping")) {
        if (!s["band_mapping"].is_object()) throw ManifestError("band_mapping must be an object");
        for (const auto& [k, v] : s["band_mapping"].items()) {
          if (!v.is_string()) throw ManifestError("band_mapping values must be strings");
          sensor.band_mapping[k] = v.get<std::string>();
        }
      }
      sensor.normalization = s.value("normalization", std::string());
      spec.supported_sensors.push_back(std::move(sensor));
    }
  }
  if (doc.contains("usage_example")) {
    spec.usage_example = require(doc, "usage_example", json::value_t::string, "a string").get<std::string>();
  }
  if (doc.contains("training_datasets")) {
    if (!doc["training_datasets"].is_array()) throw ManifestError("training_datasets must be an array");
    for (const auto& d : doc["training_datasets"]) {
      TrainingDataset ds;
      ds.name = require(d, "name", json::value_t::string, "a string").get<std::string>();
      ds.taxonomy = parse_taxonomy(require(d, "taxonomy", json::value_t::object, "an object"));
      spec.training_datasets.push_back(std::move(ds));
    }
  }

  const auto& binding = require(doc, "binding", json::value_t::object, "an object");
  const auto type = require(binding, "type", json::value_t::string, "a string").get<std::string>();
  if (type != "external") throw ManifestError("binding.type must be \"external\" in manifests");
  ExternalBinding ext;
  for (const auto& part : require(binding, "cmd", json::value_t::array, "an array")) {
    if (!part.is_string()) throw ManifestError("binding.cmd entries must be strings");
    ext.cmd.push_back(part.get<std::string>());
  }
  ext.timeout_s = binding.contains("timeout_s")
                      ? require(binding, "timeout_s", json::value_t::number_float, "a number").get<double>()
                      : 30.0;
  ext.resources = binding.value("resources", std::string());
  spec.binding = std::move(ext);

  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ManifestError(e.what());
  }
  return spec;
}

json to_manifest_json(const ToolSpec& spec) {
  json doc;
  doc["name"] = spec.name;
  doc["category"] = to_string(spec.category);
  doc["general_description"] = spec.general_description;
  if (spec.signature) {
    json tech;
    tech["text"] = spec.technical_description;
    json args = json::array();
    for (const auto& a : spec.signature->args) {
      json arg{{"name", a.name}, {"type", to_string(a.type)}};
      if (a.optional) arg["optional"] = true;
      if (!a.description.empty()) arg["description"] = a.description;
      args.push_back(std::move(arg));
    }
    tech["args"] = std::move(args);
    tech["returns"] = spec.signature->returns;
    if (spec.signature->variadic) tech["variadic"] = true;
    doc["technical_description"] = std::move(tech);
  } else {
    doc["technical_description"] = spec.technical_description;
  }
  if (!spec.supported_sensors.empty()) {
    json sensors = json::array();
    for (const auto& s : spec.supported_sensors) {
      sensors.push_back({{"sensor", s.sensor}, {"band_mapping", s.band_mapping}, {"normalization", s.normalization}});
    }
    doc["supported_sensors"] = std::move(sensors);
  }
  if (spec.usage_example) doc["usage_example"] = *spec.usage_example;
  if (!spec.training_datasets.empty()) {
    json sets = json::array();
    for (const auto& d : spec.training_datasets) sets.push_back({{"name", d.name}, {"taxonomy", taxonomy_json(d.taxonomy)}});
    doc["training_datasets"] = std::move(sets);
  }
  if (const auto* ext = std::get_if<ExternalBinding>(&spec.binding)) {
    json b{{"type", "external"}, {"cmd", ext->cmd}, {"timeout_s", ext->timeout_s}};
    if (!ext->resources.empty()) b["resources"] = ext->resources;
    doc["binding"] = std::move(b);
  } else {
    doc["binding"] = {{"type", "builtin"}};
  }
  return doc;
}

std::string format_timestamp(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << (ms % 1000) << 'Z';
  return out.str();
}

std::chrono::system_clock::time_point parse_timestamp(const std::string& text) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) throw std::invalid_argument("bad timestamp '" + text + "'");
  int millis = 0;
  if (in.peek() == '.') {
    in.get();
    in >> millis;
  }
  const std::time_t secs = ::timegm(&tm);
  return std::chrono::system_clock::time_point(std::chrono::milliseconds(static_cast<long long>(secs) * 1000 + millis));
}

json to_json(const ToolCallRecord& r) {
  json doc{{"tool", r.tool},
           {"args_digest", r.args_digest},
           {"start", format_timestamp(r.start)},
           {"stop", format_timestamp(r.stop)},
           {"status", r.ok ? "ok" : "error"},
           {"output_summary", r.output_summary}};
  if (!r.ok) doc["error"] = r.error;
  return doc;
}

ToolCallRecord tool_call_from_json(const json& doc) {
  ToolCallRecord r;
  r.tool = doc.at("tool").get<std::string>();
  r.args_digest = doc.at("args_digest").get<std::string>();
  r.start = parse_timestamp(doc.at("start").get<std::string>());
  r.stop = parse_timestamp(doc.at("stop").get<std::string>());
  r.ok = doc.at("status").get<std::string>() == "ok";
  r.error = doc.value("error", std::string());
  r.output_summary = doc.value("output_summary", std::string());
  return r;
}

}  // namespace eoscript
