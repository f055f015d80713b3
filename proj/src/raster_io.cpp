#include "eoscript/raster_io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct SidecarPaths {
  fs::path header;
  fs::path payload;
};

SidecarPaths sidecar_paths(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".json" || stem.extension() == ".bin") stem.replace_extension();
  fs::path header = stem;
  header += ".json";
  fs::path payload = stem;
  payload += ".bin";
  return {header, payload};
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v & 0xff0000U) >> 8) | ((v & 0xff000000U) >> 24);
  }
}

[[noreturn]] void malformed(const fs::path& path, const std::string& what) {
  throw RasterError(RasterErrc::MalformedHeader, path.string() + ": " + what);
}

struct Header {
  int width = 0;
  int height = 0;
  std::vector<std::string> bands;
  Crs crs = Crs::Epsg4326;
  GeoTransform geotransform;
  std::optional<float> nodata;
  bool is_mask = false;
  bool boolean = false;
  bool georeferenced = true;
  std::optional<std::map<int, std::string>> legend;
};

int positive_int(const json& doc, const char* key, const fs::path& path) {
  if (!doc.contains(key)) malformed(path, std::string("field '") + key + "' absent");
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > (1LL << 30)) {
    malformed(path, std::string("field '") + key + "' must be a positive integer");
  }
  return static_cast<int>(v.get<long long>());
}

Header parse_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RasterError(RasterErrc::MissingFile, path.string() + ": cannot open header");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    malformed(path, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed(path, "header must be a JSON object");

  Header h;
  h.width = positive_int(doc, "width", path);
  h.height = positive_int(doc, "height", path);

  if (!doc.contains("bands") || !doc["bands"].is_array() || doc["bands"].empty()) {
    malformed(path, "field 'bands' must be a nonempty array of names");
  }
  for (const auto& b : doc["bands"]) {
    if (!b.is_string()) malformed(path, "band names must be strings");
    h.bands.push_back(b.get<std::string>());
  }

  if (!doc.contains("crs") || !doc["crs"].is_string()) malformed(path, "field 'crs' must be a string");
  try {
    h.crs = parse_crs(doc["crs"].get<std::string>());
  } catch (const RasterError& e) {
    malformed(path, e.what());
  }

  if (!doc.contains("geotransform") || !doc["geotransform"].is_array() || doc["geotransform"].size() != 6) {
    malformed(path, "field 'geotransform' must be an array of 6 numbers");
  }
  std::array<double, 6> gt{};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!doc["geotransform"][i].is_number()) malformed(path, "geotransform entries must be numbers");
    gt[i] = doc["geotransform"][i].get<double>();
  }
  h.geotransform = GeoTransform{gt[0], gt[1], gt[2], gt[3], gt[4], gt[5]};
  if (!h.geotransform.is_north_up()) malformed(path, "rotated or south-up geotransform not supported");

  if (doc.contains("nodata") && !doc["nodata"].is_null()) {
    if (!doc["nodata"].is_number()) malformed(path, "field 'nodata' must be a number");
    h.nodata = static_cast<float>(doc["nodata"].get<double>());
  }
  if (!doc.contains("dtype") || doc["dtype"] != "f32le") malformed(path, "field 'dtype' must be \"f32le\"");
  if (!doc.contains("layout") || doc["layout"] != "band-sequential") {
    malformed(path, "field 'layout' must be \"band-sequential\"");
  }

  if (doc.contains("mask")) {
    const auto& m = doc["mask"];
    if (!m.is_object()) malformed(path, "field 'mask' must be an object");
    h.is_mask = true;
    h.boolean = m.value("boolean", false);
    h.georeferenced = m.value("georeferenced", true);
    if (m.contains("legend")) {
      if (!m["legend"].is_object()) malformed(path, "mask legend must be an object");
      std::map<int, std::string> legend;
      for (const auto& [key, label] : m["legend"].items()) {
        if (!label.is_string()) malformed(path, "mask legend labels must be strings");
        try {
          std::size_t used = 0;
          int id = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
          legend[id] = label.get<std::string>();
        } catch (const std::exception&) {
          malformed(path, "mask legend keys must be integers");
        }
      }
      h.legend = std::move(legend);
    }
    if (h.bands.size() != 1) malformed(path, "mask must have exactly one band");
  }
  return h;
}

std::vector<BandPlane> read_payload(const fs::path& path, const Header& h) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw RasterError(RasterErrc::MissingFile, path.string() + ": payload missing");
  const std::size_t pixels = static_cast<std::size_t>(h.width) * h.height;
  const std::size_t expected = pixels * h.bands.size() * sizeof(float);
  const auto actual = fs::file_size(path, ec);
  if (ec) throw RasterError(RasterErrc::IoFailure, path.string() + ": " + ec.message());
  if (actual != expected) {
    throw RasterError(RasterErrc::SizeMismatch, path.string() + ": payload holds " + std::to_string(actual) +
                                                    " bytes, header implies " + std::to_string(expected));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RasterError(RasterErrc::IoFailure, path.string() + ": cannot open payload");
  std::vector<BandPlane> planes(h.bands.size(), BandPlane(pixels));
  for (auto& plane : planes) {
    in.read(reinterpret_cast<char*>(plane.data()), static_cast<std::streamsize>(pixels * sizeof(float)));
    if (!in) throw RasterError(RasterErrc::IoFailure, path.string() + ": short read");
    if constexpr (std::endian::native != std::endian::little) {
      for (auto& v : plane) {
        auto bits = to_little_endian(std::bit_cast<std::uint32_t>(v));
        v = std::bit_cast<float>(bits);
      }
    }
  }
  return planes;
}

void write_payload(const fs::path& path, const std::vector<const BandPlane*>& planes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RasterError(RasterErrc::IoFailure, path.string() + ": cannot open for writing");
  for (const auto* plane : planes) {
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(plane->data()), static_cast<std::streamsize>(plane->size() * sizeof(float)));
    } else {
      for (float v : *plane) {
        auto bits = to_little_endian(std::bit_cast<std::uint32_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
      }
    }
  }
  if (!out) throw RasterError(RasterErrc::IoFailure, path.string() + ": write failed");
}

void write_header(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RasterError(RasterErrc::IoFailure, path.string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw RasterError(RasterErrc::IoFailure, path.string() + ": write failed");
}

json base_header(int width, int height, const std::vector<std::string>& bands, const GeoTransform& gt, Crs crs,
                 const std::optional<float>& nodata) {
  json doc;
  doc["width"] = width;
  doc["height"] = height;
  doc["bands"] = bands;
  doc["crs"] = crs_code(crs);
  doc["geotransform"] = gt.as_array();
  if (nodata) doc["nodata"] = static_cast<double>(*nodata);
  doc["dtype"] = "f32le";
  doc["layout"] = "band-sequential";
  return doc;
}

Raster load_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw RasterError(RasterErrc::MalformedHeader, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw RasterError(RasterErrc::MalformedHeader, path.string() + ": " + message);
  }
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  std::vector<BandPlane> planes(3, BandPlane(pixels));
  for (std::size_t i = 0; i < pixels; ++i) {
    for (std::size_t b = 0; b < 3; ++b) {
      planes[b][i] = static_cast<float>(static_cast<double>(buffer[i * 3 + b]) / 255.0);
    }
  }
  // Plain images carry no georeference: a unit-metre grid anchored at the Web Mercator origin.
  GeoTransform gt{0.0, 1.0, 0.0, 0.0, 0.0, -1.0};
  return Raster(width, height, {"RED", "GREEN", "BLUE"}, std::move(planes), gt, Crs::Epsg3857);
}

}  // namespace

bool is_png_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 8> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  return in.gcount() == static_cast<std::streamsize>(head.size()) && head == kPngSignature;
}

std::variant<Raster, Mask> load_grid(const fs::path& path) {
  std::error_code ec;
  if (path.extension() == ".png" || (fs::is_regular_file(path, ec) && is_png_file(path))) {
    if (!fs::exists(path, ec)) throw RasterError(RasterErrc::MissingFile, path.string() + ": no such file");
    return load_png(path);
  }
  const auto paths = sidecar_paths(path);
  if (!fs::exists(paths.header, ec)) throw RasterError(RasterErrc::MissingFile, paths.header.string() + ": no such file");
  const Header h = parse_header(paths.header);
  auto planes = read_payload(paths.payload, h);
  if (h.is_mask) {
    std::vector<std::int32_t> values;
    values.reserve(planes[0].size());
    for (float v : planes[0]) {
      if (!(v >= 0.0F) || v != static_cast<float>(static_cast<std::int32_t>(v))) {
        throw RasterError(RasterErrc::InvalidMask, paths.payload.string() + ": mask sample is not a class id");
      }
      values.push_back(static_cast<std::int32_t>(v));
    }
    std::optional<Georef> georef;
    if (h.georeferenced) georef = Georef{h.geotransform, h.crs};
    return Mask(h.width, h.height, std::move(values), h.boolean, h.legend, georef);
  }
  try {
    return Raster(h.width, h.height, h.bands, std::move(planes), h.geotransform, h.crs, h.nodata);
  } catch (const RasterError& e) {
    malformed(paths.header, e.what());
  }
}

Raster load_raster(const fs::path& path) {
  auto grid = load_grid(path);
  if (auto* raster = std::get_if<Raster>(&grid)) return std::move(*raster);
  throw RasterError(RasterErrc::MalformedHeader, path.string() + ": file holds a mask, not a raster");
}

Mask load_mask(const fs::path& path) {
  auto grid = load_grid(path);
  if (auto* mask = std::get_if<Mask>(&grid)) return std::move(*mask);
  throw RasterError(RasterErrc::MalformedHeader, path.string() + ": file holds a raster, not a mask");
}

fs::path save_raster(const Raster& raster, const fs::path& path) {
  const auto paths = sidecar_paths(path);
  std::vector<const BandPlane*> planes;
  for (const auto& plane : raster.bands()) planes.push_back(&plane);
  write_payload(paths.payload, planes);
  write_header(paths.header, base_header(raster.width(), raster.height(), raster.band_names(), raster.geotransform(),
                                         raster.crs(), raster.nodata()));
  return paths.header;
}

fs::path save_mask(const Mask& mask, const fs::path& path) {
  const auto paths = sidecar_paths(path);
  BandPlane plane;
  plane.reserve(mask.pixel_count());
  for (auto v : mask.values()) plane.push_back(static_cast<float>(v));
  write_payload(paths.payload, {&plane});
  const Georef georef = mask.georef().value_or(Georef{GeoTransform{0.0, 1.0, 0.0, 0.0, 0.0, -1.0}, Crs::Epsg3857});
  json doc = base_header(mask.width(), mask.height(), {"CLASS"}, georef.geotransform, georef.crs, std::nullopt);
  json m;
  m["boolean"] = mask.is_boolean();
  m["georeferenced"] = mask.georef().has_value();
  if (mask.legend()) {
    json legend = json::object();
    for (const auto& [id, label] : *mask.legend()) legend[std::to_string(id)] = label;
    m["legend"] = legend;
  }
  doc["mask"] = m;
  write_header(paths.header, doc);
  return paths.header;
}

}  // namespace eoscript
