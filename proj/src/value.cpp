#include "eoscript/value.hpp"

#include <charconv>
#include <cmath>

namespace eoscript {

std::size_t Value::byte_size() const {
  switch (type()) {
    case Type::None:
    case Type::Bool:
    case Type::Int:
    case Type::Real:
      return sizeof(Value);
    case Type::String:
      return sizeof(Value) + as_string().size();
    case Type::List: {
      std::size_t total = sizeof(Value);
      for (const auto& item : as_list()) total += item.byte_size();
      return total;
    }
    case Type::Raster:
      return sizeof(Value) + as_raster().pixel_count() * as_raster().band_count() * sizeof(float);
    case Type::Mask:
      return sizeof(Value) + as_mask().pixel_count() * sizeof(std::int32_t);
  }
  return sizeof(Value);
}

bool operator==(const Value& a, const Value& b) {
  if (a.type() != b.type()) return false;
  switch (a.type()) {
    case Value::Type::None: return true;
    case Value::Type::Bool: return a.as_bool() == b.as_bool();
    case Value::Type::Int: return a.as_int() == b.as_int();
    case Value::Type::Real: return a.as_real() == b.as_real();
    case Value::Type::String: return a.as_string() == b.as_string();
    case Value::Type::List: return a.as_list() == b.as_list();
    case Value::Type::Raster: return a.as_raster().identical_to(b.as_raster());
    case Value::Type::Mask: return a.as_mask() == b.as_mask();
  }
  return false;
}

std::string type_name(Value::Type type) {
  switch (type) {
    case Value::Type::None: return "None";
    case Value::Type::Bool: return "bool";
    case Value::Type::Int: return "int";
    case Value::Type::Real: return "real";
    case Value::Type::String: return "str";
    case Value::Type::List: return "list";
    case Value::Type::Raster: return "raster";
    case Value::Type::Mask: return "mask";
  }
  return "?";
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += "'";
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ",";
    out += names[i];
  }
  return out;
}

}  // namespace

std::string to_repr(const Value& v) {
  switch (v.type()) {
    case Value::Type::None: return "None";
    case Value::Type::Bool: return v.as_bool() ? "True" : "False";
    case Value::Type::Int: return std::to_string(v.as_int());
    case Value::Type::Real: return format_real(v.as_real());
    case Value::Type::String: return quote(v.as_string());
    case Value::Type::List: {
      std::string out = "[";
      const auto& items = v.as_list();
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += to_repr(items[i]);
      }
      return out + "]";
    }
    case Value::Type::Raster:
    case Value::Type::Mask:
      return "<" + summarize(v) + ">";
  }
  return "?";
}

std::string to_display(const Value& v) {
  if (v.is(Value::Type::String)) return v.as_string();
  return to_repr(v);
}

std::string summarize(const Value& v) {
  switch (v.type()) {
    case Value::Type::List:
      return "list[" + std::to_string(v.as_list().size()) + "]";
    case Value::Type::String:
      return "str[" + std::to_string(v.as_string().size()) + "]";
    case Value::Type::Raster: {
      const auto& r = v.as_raster();
      return "Raster " + std::to_string(r.width()) + "x" + std::to_string(r.height()) + " bands=[" +
             join_names(r.band_names()) + "]";
    }
    case Value::Type::Mask: {
      const auto& m = v.as_mask();
      return std::string(m.is_boolean() ? "BoolMask " : "Mask ") + std::to_string(m.width()) + "x" +
             std::to_string(m.height());
    }
    default:
      return type_name(v.type());
  }
}

}  // namespace eoscript
