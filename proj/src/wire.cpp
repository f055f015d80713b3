#include "eoscript/wire.hpp"

#include <cmath>
#include <stdexcept>

#include "eoscript/raster_io.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

ValueEncoder::ValueEncoder(fs::path spill_dir, std::string prefix)
    : spill_dir_(std::move(spill_dir)), prefix_(std::move(prefix)) {}

json ValueEncoder::encode(const Value& value) {
  switch (value.type()) {
    case Value::Type::None: return nullptr;
    case Value::Type::Bool: return value.as_bool();
    case Value::Type::Int: return value.as_int();
    case Value::Type::Real: {
      const double v = value.as_real();
      if (std::isfinite(v)) return v;
      return json{{"kind", "real"}, {"value", format_real(v)}};
    }
    case Value::Type::String: return value.as_string();
    case Value::Type::List: {
      json arr = json::array();
      for (const auto& item : value.as_list()) arr.push_back(encode(item));
      return arr;
    }
    case Value::Type::Raster:
    case Value::Type::Mask: {
      fs::create_directories(spill_dir_);
      const fs::path stem = spill_dir_ / (prefix_ + "_" + std::to_string(counter_++));
      if (value.is(Value::Type::Raster)) {
        return json{{"kind", "raster"}, {"path", fs::absolute(save_raster(value.as_raster(), stem)).string()}};
      }
      return json{{"kind", "mask"}, {"path", fs::absolute(save_mask(value.as_mask(), stem)).string()}};
    }
  }
  return nullptr;
}

Value decode_value(const json& doc, const fs::path& base_dir) {
  switch (doc.type()) {
    case json::value_t::null: return Value::none();
    case json::value_t::boolean: return Value::boolean(doc.get<bool>());
    case json::value_t::number_integer: return Value::integer(doc.get<std::int64_t>());
    case json::value_t::number_unsigned: {
      const auto u = doc.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) return Value::real(static_cast<double>(u));
      return Value::integer(static_cast<std::int64_t>(u));
    }
    case json::value_t::number_float: return Value::real(doc.get<double>());
    case json::value_t::string: return Value::string(doc.get<std::string>());
    case json::value_t::array: {
      ValueList items;
      items.reserve(doc.size());
      for (const auto& item : doc) items.push_back(decode_value(item, base_dir));
      return Value::list(std::move(items));
    }
    case json::value_t::object: {
      const auto kind = doc.value("kind", std::string());
      if (kind == "real") {
        const auto text = doc.value("value", std::string());
        if (text == "inf") return Value::real(INFINITY);
        if (text == "-inf") return Value::real(-INFINITY);
        if (text == "nan") return Value::real(NAN);
        throw std::invalid_argument("bad non-finite real encoding '" + text + "'");
      }
      if (kind == "raster" || kind == "mask") {
        if (!doc.contains("path") || !doc["path"].is_string()) {
          throw std::invalid_argument(kind + " value lacks a string 'path'");
        }
        fs::path p = doc["path"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        if (kind == "raster") return Value::raster(load_raster(p));
        return Value::mask(load_mask(p));
      }
      throw std::invalid_argument("unknown value object kind '" + kind + "'");
    }
    default:
      throw std::invalid_argument("unsupported JSON value in wire protocol");
  }
}

json make_request(const std::string& tool, const json& encoded_args) {
  return json{{"tool", tool}, {"args", encoded_args}};
}

ToolResponse parse_response(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("status") || !doc["status"].is_string()) {
    throw std::invalid_argument("response lacks a string 'status'");
  }
  ToolResponse out;
  const auto status = doc["status"].get<std::string>();
  if (status == "ok") {
    if (!doc.contains("value")) throw std::invalid_argument("ok response lacks 'value'");
    out.ok = true;
    out.value = doc["value"];
  } else if (status == "error") {
    if (!doc.contains("message") || !doc["message"].is_string()) {
      throw std::invalid_argument("error response lacks a string 'message'");
    }
    out.message = doc["message"].get<std::string>();
  } else {
    throw std::invalid_argument("unknown response status '" + status + "'");
  }
  return out;
}

}  // namespace eoscript
