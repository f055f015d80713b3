#pragma once

// Dynamic values flowing through scripts and tool calls.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "eoscript/raster.hpp"

namespace eoscript {

class Value;
using ValueList = std::vector<Value>;

class Value {
 public:
  enum class Type { None, Bool, Int, Real, String, List, Raster, Mask };

  Value() = default;

  static Value none() { return Value(); }
  static Value boolean(bool v) { return Value(Storage(v)); }
  static Value integer(std::int64_t v) { return Value(Storage(v)); }
  static Value real(double v) { return Value(Storage(v)); }
  static Value string(std::string v) { return Value(Storage(std::move(v))); }
  static Value list(ValueList items) { return Value(Storage(std::make_shared<const ValueList>(std::move(items)))); }
  static Value raster(std::shared_ptr<const Raster> r) { return Value(Storage(std::move(r))); }
  static Value raster(Raster r) { return raster(std::make_shared<const Raster>(std::move(r))); }
  static Value mask(std::shared_ptr<const Mask> m) { return Value(Storage(std::move(m))); }
  static Value mask(Mask m) { return mask(std::make_shared<const Mask>(std::move(m))); }

  Type type() const noexcept { return static_cast<Type>(data_.index()); }
  bool is(Type t) const noexcept { return type() == t; }
  bool is_number() const noexcept { return is(Type::Int) || is(Type::Real); }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_real() const { return std::get<double>(data_); }
  // Int or Real widened to double.
  double as_number() const { return is(Type::Int) ? static_cast<double>(as_int()) : as_real(); }
  const std::string& as_string() const { return std::get<std::string>(data_); }
  const ValueList& as_list() const { return *std::get<std::shared_ptr<const ValueList>>(data_); }
  const Raster& as_raster() const { return *std::get<std::shared_ptr<const Raster>>(data_); }
  const Mask& as_mask() const { return *std::get<std::shared_ptr<const Mask>>(data_); }
  std::shared_ptr<const Raster> raster_ptr() const { return std::get<std::shared_ptr<const Raster>>(data_); }
  std::shared_ptr<const Mask> mask_ptr() const { return std::get<std::shared_ptr<const Mask>>(data_); }

  // Approximate bytes held, counting shared payloads once per reference.
  std::size_t byte_size() const;

  // Structural equality; rasters compare bit-exactly.
  friend bool operator==(const Value& a, const Value& b);

 private:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                               std::shared_ptr<const ValueList>, std::shared_ptr<const Raster>,
                               std::shared_ptr<const Mask>>;
  explicit Value(Storage s) : data_(std::move(s)) {}

  Storage data_;
};

std::string type_name(Value::Type type);

// What print() shows: strings bare, everything else as repr.
std::string to_display(const Value& v);
// Python-flavoured repr: True, 3, 0.5, 'text', [1, 2], <Raster 4x4 bands=[RED,GREEN,BLUE]>.
std::string to_repr(const Value& v);
// Type and shape only, never the payload.
std::string summarize(const Value& v);

// Shortest decimal that round-trips, always carrying '.', 'e', "inf" or "nan".
std::string format_real(double v);

}  // namespace eoscript
