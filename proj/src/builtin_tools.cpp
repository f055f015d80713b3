#include <cmath>
#include <fstream>
#include <sstream>

#include "eoscript/catalog.hpp"
#include "eoscript/geo_ops.hpp"
#include "eoscript/raster_io.hpp"
#include "eoscript/registry.hpp"
#include "eoscript/spectral.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Args = std::span<const Value>;

ArgSpec arg(std::string name, ArgType type, std::string description = {}, bool optional = false) {
  return ArgSpec{std::move(name), type, optional, std::move(description)};
}

ToolSpec data_tool(std::string name, std::string general, std::string technical, std::vector<ArgSpec> args,
                   std::string returns, BuiltinFn fn, bool variadic = false) {
  ToolSpec spec;
  spec.name = std::move(name);
  spec.category = ToolCategory::Data;
  spec.general_description = std::move(general);
  spec.technical_description = std::move(technical);
  spec.signature = Signature{std::move(args), std::move(returns), variadic};
  spec.binding = std::move(fn);
  return spec;
}

std::shared_ptr<const Raster> image_arg(const Value& v) {
  if (v.is(Value::Type::Raster)) return v.raster_ptr();
  return std::make_shared<const Raster>(load_raster(v.as_string()));
}

int int_arg(const Value& v, const char* what) {
  const auto n = v.as_int();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(std::string(what) + " is out of range");
  }
  return static_cast<int>(n);
}

std::vector<std::string> string_list(const Value& v, const char* what) {
  std::vector<std::string> out;
  for (const auto& item : v.as_list()) {
    if (!item.is(Value::Type::String)) throw std::invalid_argument(std::string(what) + " must be a list of strings");
    out.push_back(item.as_string());
  }
  return out;
}

const fs::path& attachment(const ToolContext& ctx, std::int64_t index, bool image_only) {
  std::vector<const fs::path*> pool;
  for (const auto& p : ctx.attachments) {
    if (!image_only || is_png_file(p) || p.extension() == ".json" || p.extension() == ".bin") {
      if (image_only && p.extension() == ".json") {
        std::ifstream in(p);
        const auto doc = json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.contains("width")) continue;
      }
      pool.push_back(&p);
    }
  }
  if (pool.empty()) throw std::runtime_error(image_only ? "no image was uploaded with this query" : "no file was uploaded with this query");
  if (index < 0 || static_cast<std::size_t>(index) >= pool.size()) {
    throw std::out_of_range("upload index " + std::to_string(index) + " out of range (" + std::to_string(pool.size()) +
                            " available)");
  }
  return *pool[static_cast<std::size_t>(index)];
}

Value json_to_value(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return Value::none();
    case json::value_t::boolean: return Value::boolean(j.get<bool>());
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return Value::integer(j.get<std::int64_t>());
    case json::value_t::number_float: return Value::real(j.get<double>());
    case json::value_t::string: return Value::string(j.get<std::string>());
    case json::value_t::array: {
      ValueList items;
      for (const auto& e : j) items.push_back(json_to_value(e));
      return Value::list(std::move(items));
    }
    default: throw std::invalid_argument("objects cannot be returned; select a leaf with a dotted key");
  }
}

Value read_json_value(Args a, ToolContext&) {
  std::ifstream in(a[0].as_string());
  if (!in) throw std::runtime_error("cannot open " + a[0].as_string());
  const json doc = json::parse(in);
  const json* node = &doc;
  std::stringstream keys(a[1].as_string());
  std::string key;
  while (std::getline(keys, key, '.')) {
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw std::invalid_argument("key '" + key + "' does not index an array");
      }
      if (idx >= node->size()) throw std::out_of_range("index " + key + " out of range");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(key)) {
      node = &node->at(key);
    } else {
      throw std::invalid_argument("key '" + a[1].as_string() + "' not found");
    }
  }
  return json_to_value(*node);
}

Value grid_value(std::variant<Raster, Mask> grid) {
  if (auto* r = std::get_if<Raster>(&grid)) return Value::raster(std::move(*r));
  return Value::mask(std::move(std::get<Mask>(grid)));
}

Value save_grid(Args a, ToolContext& ctx) {
  const std::string& name = a[1].as_string();
  if (name.empty() || name.find_first_of("/\\") != std::string::npos || name.front() == '.') {
    throw std::invalid_argument("artifact name must be a plain file stem");
  }
  fs::path dir = ctx.artifact_dir.empty() ? fs::path("artifacts") : ctx.artifact_dir;
  fs::create_directories(dir);
  fs::path stem = fs::path(name).replace_extension();
  const fs::path header = a[0].is(Value::Type::Raster) ? save_raster(a[0].as_raster(), dir / stem)
                                                       : save_mask(a[0].as_mask(), dir / stem);
  if (ctx.artifacts) ctx.artifacts->push_back(header.string());
  return Value::string(header.string());
}

const SceneProvider& scenes(const ToolContext& ctx) {
  if (!ctx.scenes) throw std::runtime_error("no scene catalog is configured");
  return *ctx.scenes;
}

Value search_scenes(Args a, ToolContext& ctx) {
  const GeoBounds bounds(a[0].as_number(), a[1].as_number(), a[2].as_number(), a[3].as_number(), Crs::Epsg4326);
  const std::string sensor = a.size() > 6 ? a[6].as_string() : std::string();
  ValueList ids;
  for (auto& id : scenes(ctx).search(bounds, DateRange{a[4].as_string(), a[5].as_string()}, sensor)) {
    ids.push_back(Value::string(std::move(id)));
  }
  return Value::list(std::move(ids));
}

std::string index_general(IndexKind kind) {
  for (const auto& info : list_indices()) {
    if (info.kind == kind) return info.description;
  }
  return index_name(kind);
}

std::string index_technical(IndexKind kind) {
  std::string roles;
  for (const auto& r : required_roles(kind)) roles += (roles.empty() ? "" : ", ") + r;
  std::string text = "Input: an image path or raster carrying bands " + roles +
                     " as reflectance in [0,1]. Output: single-band raster named " + index_name(kind) +
                     "; pixels with nodata inputs or a near-zero denominator are nodata (-9999 unless the input "
                     "declares its own).";
  if (kind == IndexKind::Ndsi) text += " The SWIR role must be chosen explicitly: pass \"SWIR1\" or \"SWIR2\".";
  if (kind == IndexKind::Wbi) text += " Requires the 900 nm and 970 nm channels as NIR900 and NIR970.";
  return text;
}

ToolSpec index_tool(IndexKind kind) {
  std::string name = index_name(kind);
  for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::vector<ArgSpec> args{arg("image", ArgType::Image, "uploaded image path or raster")};
  if (kind == IndexKind::Ndsi) args.push_back(arg("swir_band", ArgType::String, "SWIR1 or SWIR2"));
  return data_tool(name, index_general(kind), index_technical(kind), std::move(args), "raster",
                   [kind](Args a, ToolContext&) {
                     BandMap map;
                     if (kind == IndexKind::Ndsi) map["SWIR"] = a[1].as_string();
                     return Value::raster(compute_index(kind, *image_arg(a[0]), map));
                   });
}

}  // namespace

std::vector<ToolSpec> builtin_tools() {
  using T = ArgType;
  std::vector<ToolSpec> tools;

  tools.push_back(data_tool(
      "get_uploaded_image_path", "Returns the file path of an image the user uploaded with the query.",
      "Input: optional zero-based index among uploaded images (default 0). Output: path string usable by any "
      "tool that takes an image.",
      {arg("index", T::Int, "which uploaded image", true)}, "string", [](Args a, ToolContext& ctx) {
        return Value::string(attachment(ctx, a.empty() ? 0 : a[0].as_int(), true).string());
      }));
  tools.push_back(data_tool(
      "get_uploaded_file_path", "Returns the file path of any file the user uploaded with the query.",
      "Input: zero-based index among all uploads, images and documents alike. Output: path string.",
      {arg("index", T::Int, "which upload")}, "string",
      [](Args a, ToolContext& ctx) { return Value::string(attachment(ctx, a[0].as_int(), false).string()); }));
  tools.push_back(data_tool("read_json_value", "Reads one field from a JSON document such as a claim or report.",
                            "Input: file path and a dotted key (array elements by number, e.g. \"claims.0.amount\"). "
                            "Output: the scalar or list stored there.",
                            {arg("path", T::String), arg("key", T::String)}, "any", read_json_value));
  tools.push_back(data_tool("load_raster", "Loads a raster or mask from disk.",
                            "Input: path to a sidecar header (.json), payload (.bin) or 8-bit PNG. Output: raster, or "
                            "mask when the header describes one.",
                            {arg("path", T::String)}, "raster|mask", [](Args a, ToolContext&) {
                              const fs::path p = a[0].as_string();
                              if (is_png_file(p)) return Value::raster(load_raster(p));
                              return grid_value(load_grid(p));
                            }));
  tools.push_back(data_tool("save_raster", "Saves a raster or mask as a run artifact for the user to inspect.",
                            "Input: raster or mask, and a file stem without directories. Output: path of the written "
                            "sidecar header; the file is listed among the run's artifacts.",
                            {arg("grid", T::Grid), arg("name", T::String)}, "string", save_grid));
  tools.push_back(data_tool("select_bands", "Keeps the named bands of a raster in the given order.",
                            "Input: image and a list of band names such as [\"NIR\", \"RED\"]. Output: raster.",
                            {arg("image", T::Image), arg("bands", T::List)}, "raster", [](Args a, ToolContext&) {
                              return Value::raster(select_bands(*image_arg(a[0]), string_list(a[1], "bands")));
                            }));
  tools.push_back(data_tool(
      "crop_window", "Cuts a pixel window out of a raster, keeping its georeference consistent.",
      "Input: image, col0, row0, width, height in pixels. Output: raster whose origin is shifted accordingly.",
      {arg("image", T::Image), arg("col0", T::Int), arg("row0", T::Int), arg("width", T::Int), arg("height", T::Int)},
      "raster", [](Args a, ToolContext&) {
        return Value::raster(crop_window(*image_arg(a[0]), int_arg(a[1], "col0"), int_arg(a[2], "row0"),
                                         int_arg(a[3], "width"), int_arg(a[4], "height")));
      }));
  tools.push_back(data_tool("raster_stats", "Summary statistics of one band, ignoring nodata pixels.",
                            "Input: image and band name. Output: list [min, max, mean, valid_count].",
                            {arg("image", T::Image), arg("band", T::String)}, "list", [](Args a, ToolContext&) {
                              const auto s = raster_stats(*image_arg(a[0]), a[1].as_string());
                              return Value::list({Value::real(s.min), Value::real(s.max), Value::real(s.mean),
                                                  Value::integer(static_cast<std::int64_t>(s.valid_count))});
                            }));
  tools.push_back(data_tool(
      "search_scenes", "Finds archived satellite scenes over an area and period.",
      "Input: min_lon, min_lat, max_lon, max_lat (degrees), start and end dates as YYYY-MM-DD (inclusive), optional "
      "sensor name such as \"sentinel-2\". Output: list of scene ids sorted by acquisition date.",
      {arg("min_lon", T::Number), arg("min_lat", T::Number), arg("max_lon", T::Number), arg("max_lat", T::Number),
       arg("start", T::String), arg("end", T::String), arg("sensor", T::String, {}, true)},
      "list", search_scenes));
  tools.push_back(data_tool("fetch_scene", "Retrieves an archived scene as a raster.",
                            "Input: scene id returned by search_scenes. Output: raster with canonical band names.",
                            {arg("scene_id", T::String)}, "raster", [](Args a, ToolContext& ctx) {
                              return Value::raster(scenes(ctx).fetch(a[0].as_string()));
                            }));
  tools.push_back(data_tool(
      "reproject", "Reprojects a raster between geographic and Web Mercator coordinates.",
      "Input: image and target CRS, \"EPSG:4326\" or \"EPSG:3857\". Nearest-neighbour resampling; the centre pixel's "
      "ground resolution is preserved. Output: raster.",
      {arg("image", T::Image), arg("crs", T::String)}, "raster",
      [](Args a, ToolContext&) { return Value::raster(reproject(*image_arg(a[0]), parse_crs(a[1].as_string()))); }));
  tools.push_back(data_tool("make_tiles", "Splits a raster into a grid of tiles.",
                            "Input: image, tile width and tile height in pixels. Output: list of rasters in row-major "
                            "order; edge tiles may be smaller.",
                            {arg("image", T::Image), arg("tile_width", T::Int), arg("tile_height", T::Int)}, "list",
                            [](Args a, ToolContext&) {
                              auto grid = make_tiles(*image_arg(a[0]), int_arg(a[1], "tile_width"),
                                                     int_arg(a[2], "tile_height"));
                              ValueList out;
                              for (auto& t : grid.tiles) out.push_back(Value::raster(std::move(t.raster)));
                              return Value::list(std::move(out));
                            }));
  tools.push_back(data_tool("mosaic", "Merges rasters on a common grid into one raster.",
                            "Input: list of rasters sharing CRS, pixel size and bands. Output: raster over the union "
                            "extent; where several inputs hold data the earliest one wins.",
                            {arg("rasters", T::List)}, "raster", [](Args a, ToolContext&) {
                              std::vector<Raster> rs;
                              for (const auto& v : a[0].as_list()) {
                                if (!v.is(Value::Type::Raster)) throw std::invalid_argument("mosaic expects rasters");
                                rs.push_back(v.as_raster());
                              }
                              return Value::raster(mosaic(rs));
                            }));
  tools.push_back(data_tool(
      "mask_area_m2", "Ground area covered by one class of a georeferenced mask.",
      "Input: mask produced from a georeferenced image, and a class id (1 for boolean masks). Output: area in square "
      "metres on a spherical earth (Web Mercator grids are corrected by cos^2 of latitude per row).",
      {arg("mask", T::Mask), arg("class_id", T::Int)}, "number", [](Args a, ToolContext&) {
        const Mask& m = a[0].as_mask();
        if (!m.georef()) throw std::invalid_argument("mask carries no georeference");
        return Value::real(mask_area_m2(m, m.georef()->geotransform, m.georef()->crs, int_arg(a[1], "class_id")));
      }));
  tools.push_back(data_tool(
      "count_detections", "Counts detected objects, optionally of a single class.",
      "Input: detection list as returned by a detector ([cx, cy, w, h, angle, class_id, score] per object) and an "
      "optional class id. Output: integer count.",
      {arg("detections", T::List), arg("class_id", T::Int, {}, true)}, "int", [](Args a, ToolContext&) {
        std::int64_t n = 0;
        for (const auto& d : a[0].as_list()) {
          if (!d.is(Value::Type::List) || d.as_list().size() < 6) throw std::invalid_argument("malformed detection");
          const auto& cls = d.as_list()[5];
          if (a.size() < 2 || (cls.is_number() && cls.as_number() == static_cast<double>(a[1].as_int()))) ++n;
        }
        return Value::integer(n);
      }));

  for (auto kind : kAllIndexKinds) tools.push_back(index_tool(kind));
  return tools;
}

}  // namespace eoscript
