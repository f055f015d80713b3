#include "eoscript/mock_tools.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <iterator>
#include <numbers>
#include <thread>

#include "eoscript/digest.hpp"
#include "eoscript/raster_io.hpp"
#include "eoscript/wire.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

const std::map<int, std::string>& eurosat_taxonomy() {
  static const std::map<int, std::string> t = {
      {0, "annual crop"}, {1, "forest"},         {2, "herbaceous vegetation"}, {3, "highway"}, {4, "industrial"},
      {5, "pasture"},     {6, "permanent crop"}, {7, "residential"},           {8, "river"},   {9, "sea or lake"}};
  return t;
}

const std::map<int, std::string>& flair2_taxonomy() {
  static const std::map<int, std::string> t = {
      {1, "building"},   {2, "pervious surface"}, {3, "impervious surface"},     {4, "bare soil"},
      {5, "water"},      {6, "coniferous"},       {7, "deciduous"},              {8, "brushwood"},
      {9, "vineyard"},   {10, "herbaceous vegetation"}, {11, "agricultural land"}, {12, "plowed land"},
      {13, "others"}};
  return t;
}

const std::map<int, std::string>& nwpu_taxonomy() {
  static const std::map<int, std::string> t = {
      {1, "airplane"},     {2, "ship"},           {3, "storage tank"},       {4, "baseball diamond"},
      {5, "tennis court"}, {6, "basketball court"}, {7, "ground track field"}, {8, "harbor"},
      {9, "bridge"},       {10, "vehicle"}};
  return t;
}

const std::map<int, std::string>& burn_scar_taxonomy() {
  static const std::map<int, std::string> t = {{0, "not burned"}, {1, "burn scar"}};
  return t;
}

std::string payload_digest(const Raster& image) {
  std::string bytes;
  bytes.reserve(image.pixel_count() * image.band_count() * 4);
  for (const auto& plane : image.bands()) {
    for (float v : plane) {
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<char>((u >> (8 * k)) & 0xFF));
    }
  }
  return sha256_hex(bytes);
}

namespace {

std::uint64_t digest_seed(const Raster& image) {
  return std::stoull(payload_digest(image).substr(0, 16), nullptr, 16);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

std::optional<Georef> georef_of(const Raster& image) { return Georef{image.geotransform(), image.crs()}; }

}  // namespace

int mock_classify(const Raster& image) {
  return static_cast<int>(digest_seed(image) % eurosat_taxonomy().size());
}

Mask mock_segment(const Raster& image) {
  std::vector<const BandPlane*> planes;
  for (const char* name : {"RED", "GREEN", "BLUE"}) {
    if (auto idx = image.band_index(name)) planes.push_back(&image.band(*idx));
  }
  if (planes.size() != 3) {
    planes.clear();
    for (const auto& p : image.bands()) planes.push_back(&p);
  }
  std::vector<std::int32_t> values(image.pixel_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double sum = 0.0;
    bool missing = false;
    for (const auto* p : planes) {
      missing = missing || image.is_nodata((*p)[i]);
      sum += (*p)[i];
    }
    if (missing) {
      values[i] = 13;
      continue;
    }
    const double cls = 1.0 + std::floor(sum / static_cast<double>(planes.size()) * 13.0);
    values[i] = static_cast<std::int32_t>(std::clamp(cls, 1.0, 13.0));
  }
  return Mask(image.width(), image.height(), std::move(values), false, flair2_taxonomy(), georef_of(image));
}

std::vector<MockDetection> mock_detect(const Raster& image) {
  bool constant = true;
  const float first = image.band(0)[0];
  for (const auto& plane : image.bands()) {
    for (float v : plane) {
      if (v != first) {
        constant = false;
        break;
      }
    }
    if (!constant) break;
  }
  if (constant) return {};
  SplitMix64 rng(digest_seed(image));
  const double W = image.width();
  const double H = image.height();
  const auto n = rng.next() % 6;
  std::vector<MockDetection> out;
  for (std::uint64_t i = 0; i < n; ++i) {
    MockDetection d{};
    d.cx = rng.uniform() * W;
    d.cy = rng.uniform() * H;
    d.w = 4.0 + rng.uniform() * std::max(1.0, W / 4.0);
    d.h = 4.0 + rng.uniform() * std::max(1.0, H / 4.0);
    d.angle = (0.5 - rng.uniform()) * std::numbers::pi;
    d.class_id = 1 + static_cast<int>(rng.next() % nwpu_taxonomy().size());
    d.score = 0.5 + 0.5 * rng.uniform();
    out.push_back(d);
  }
  return out;
}

Mask mock_burn_scar(const Raster& image, const std::string& band, double threshold) {
  const auto idx = image.band_index(band);
  if (!idx) throw std::invalid_argument("burn scar mapping needs band " + band + ", which the image lacks");
  const auto& plane = image.band(*idx);
  std::vector<std::int32_t> values(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) {
    values[i] = !image.is_nodata(plane[i]) && plane[i] >= threshold ? 1 : 0;
  }
  return Mask(image.width(), image.height(), std::move(values), true, burn_scar_taxonomy(), georef_of(image));
}

std::vector<ToolSpec> mock_model_tools(const MockToolOptions& options) {
  auto binding = [&](const std::string& name) {
    ExternalBinding b;
    b.cmd = {options.executable.string(), "--tool", name};
    if (auto it = options.extra_args.find(name); it != options.extra_args.end()) {
      b.cmd.insert(b.cmd.end(), it->second.begin(), it->second.end());
    }
    b.timeout_s = options.timeout_s;
    b.resources = "gpu";
    return b;
  };
  const ArgSpec image{"image", ArgType::Image, false, "uploaded image path or raster"};
  const std::map<std::string, std::string> s2_rgb = {{"B4", "RED"}, {"B3", "GREEN"}, {"B2", "BLUE"}};
  const std::map<std::string, std::string> rgb = {{"R", "RED"}, {"G", "GREEN"}, {"B", "BLUE"}};

  std::vector<ToolSpec> tools;

  ToolSpec cls;
  cls.name = kClassificationTool;
  cls.category = ToolCategory::Model;
  cls.general_description = "Assigns one land-cover class to a whole image patch.";
  cls.technical_description =
      "Input: image (path or raster). Output: the predicted class label as a string, taken from the taxonomy "
      "below.";
  cls.signature = Signature{{image}, "string", false};
  cls.supported_sensors = {{"sentinel-2", s2_rgb, "surface reflectance in [0,1]"},
                           {"rgb", rgb, "8-bit values divided by 255"}};
  cls.usage_example = "path = get_uploaded_image_path()\nlabel = dofa_classification_tool(path)\nprint(label)";
  cls.training_datasets = {{"EuroSAT", eurosat_taxonomy()}};
  cls.binding = binding(cls.name);
  tools.push_back(std::move(cls));

  ToolSpec seg;
  seg.name = kSegmentationTool;
  seg.category = ToolCategory::Model;
  seg.general_description = "Labels every pixel of an aerial or satellite image with a land-cover class.";
  seg.technical_description =
      "Input: image (path or raster) with RED, GREEN and BLUE bands. Output: class mask of the same size, "
      "georeferenced like the input. Test presence with `k in mask` and count pixels with `(mask == k).sum()`.";
  seg.signature = Signature{{image}, "mask", false};
  seg.supported_sensors = {{"aerial-rgb", rgb, "8-bit values divided by 255"},
                           {"sentinel-2", s2_rgb, "surface reflectance in [0,1]"}};
  seg.usage_example =
      "path = get_uploaded_image_path()\nmask = dofa_segmentation_tool(path)\nprint((mask == 5).sum())";
  seg.training_datasets = {{"FLAIR-2", flair2_taxonomy()}};
  seg.binding = binding(seg.name);
  tools.push_back(std::move(seg));

  ToolSpec det;
  det.name = kDetectionTool;
  det.category = ToolCategory::Model;
  det.general_description = "Finds objects in very-high-resolution imagery and returns oriented boxes.";
  det.technical_description =
      "Input: image (path or raster). Output: list of detections, each [cx, cy, w, h, angle, class_id, score] in "
      "pixel units with angle in radians; use count_detections or len() to count them.";
  det.signature = Signature{{image}, "list", false};
  det.supported_sensors = {{"aerial-rgb", rgb, "8-bit values divided by 255"}};
  det.usage_example =
      "path = get_uploaded_image_path()\nboxes = object_detection_tool(path)\nprint(count_detections(boxes, 10))";
  det.training_datasets = {{"NWPU VHR-10", nwpu_taxonomy()}};
  det.binding = binding(det.name);
  tools.push_back(std::move(det));

  ToolSpec burn;
  burn.name = kBurnScarTool;
  burn.category = ToolCategory::Model;
  burn.general_description = "Maps burned areas after a wildfire.";
  burn.technical_description =
      "Input: image (path or raster) with a SWIR2 band, optional band name (default \"SWIR2\") and threshold "
      "(default 0.3). Output: boolean mask, georeferenced like the input; pass it with class 1 to mask_area_m2 for "
      "the burned area.";
  burn.signature = Signature{{image,
                              {"band", ArgType::String, true, "band to threshold"},
                              {"threshold", ArgType::Number, true, "reflectance threshold"}},
                             "mask",
                             false};
  burn.supported_sensors = {
      {"hls", {{"B07", "SWIR2"}, {"B06", "SWIR1"}, {"B05", "NIR"}, {"B04", "RED"}}, "surface reflectance in [0,1]"}};
  burn.usage_example =
      "path = get_uploaded_image_path()\nburned = burn_scar_tool(path)\nprint(mask_area_m2(burned, 1))";
  burn.training_datasets = {{"HLS Burn Scars", burn_scar_taxonomy()}};
  burn.binding = binding(burn.name);
  tools.push_back(std::move(burn));

  return tools;
}

namespace {

Raster image_from(const Value& v) {
  if (v.is(Value::Type::Raster)) return v.as_raster();
  if (v.is(Value::Type::String)) return load_raster(v.as_string());
  throw std::invalid_argument("image must be a path or raster, got " + type_name(v.type()));
}

Value run_tool(const std::string& tool, const ValueList& args, bool bad_class) {
  if (args.empty()) throw std::invalid_argument(tool + " needs an image argument");
  const Raster image = image_from(args[0]);
  if (tool == kClassificationTool) {
    return Value::string(eurosat_taxonomy().at(mock_classify(image)));
  }
  if (tool == kSegmentationTool) {
    Mask m = mock_segment(image);
    if (bad_class) {
      auto values = m.values();
      values[0] = 99;
      return Value::mask(Mask(m.width(), m.height(), std::move(values), false, std::nullopt, m.georef()));
    }
    return Value::mask(std::move(m));
  }
  if (tool == kDetectionTool) {
    ValueList out;
    for (const auto& d : mock_detect(image)) {
      out.push_back(Value::list({Value::real(d.cx), Value::real(d.cy), Value::real(d.w), Value::real(d.h),
                                 Value::real(d.angle), Value::integer(d.class_id), Value::real(d.score)}));
    }
    return Value::list(std::move(out));
  }
  if (tool == kBurnScarTool) {
    const std::string band = args.size() > 1 ? args[1].as_string() : std::string("SWIR2");
    const double threshold = args.size() > 2 ? args[2].as_number() : 0.3;
    return Value::mask(mock_burn_scar(image, band, threshold));
  }
  throw std::invalid_argument("unknown mock tool '" + tool + "'");
}

}  // namespace

int mock_tool_main(const std::vector<std::string>& argv, std::istream& in, std::ostream& out, std::ostream& err) {
  std::string tool;
  std::optional<std::string> fail;
  bool crash = false, garbage = false, bad_class = false;
  double hang_s = 0.0;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    const auto& a = argv[i];
    const bool has_value = i + 1 < argv.size();
    if (a == "--tool" && has_value) {
      tool = argv[++i];
    } else if (a == "--fail" && has_value) {
      fail = argv[++i];
    } else if (a == "--hang" && has_value) {
      hang_s = std::stod(argv[++i]);
    } else if (a == "--crash") {
      crash = true;
    } else if (a == "--garbage") {
      garbage = true;
    } else if (a == "--bad-class") {
      bad_class = true;
    } else {
      err << "eo-mock-tool: unexpected argument '" << a << "'\n";
      return 2;
    }
  }

  const std::string request_text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (hang_s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(hang_s));
  if (crash) {
    err << "Traceback (most recent call last):\n  RuntimeError: simulated model crash\n";
    return 3;
  }
  if (garbage) {
    out << "model warming up...\n";
    return 0;
  }
  if (fail) {
    out << json{{"status", "error"}, {"message", *fail}}.dump() << '\n';
    return 1;
  }
  try {
    const json request = json::parse(request_text);
    const std::string requested = request.at("tool").get<std::string>();
    if (!tool.empty() && requested != tool) throw std::invalid_argument("bound to " + tool + ", asked for " + requested);
    const fs::path cwd = fs::current_path();
    ValueList args;
    for (const auto& a : request.at("args")) args.push_back(decode_value(a, cwd));
    const Value result = run_tool(requested, args, bad_class);
    const char* env_dir = std::getenv("EOSCRIPT_TOOL_OUTPUT_DIR");
    ValueEncoder encoder((env_dir && *env_dir ? fs::path(env_dir) : cwd) / "out", "result");
    out << json{{"status", "ok"}, {"value", encoder.encode(result)}}.dump() << '\n';
    return 0;
  } catch (const std::exception& e) {
    out << json{{"status", "error"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace eoscript
