#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "eoscript/catalog.hpp"
#include "eoscript/mock_tools.hpp"
#include "eoscript/raster_io.hpp"
#include "eoscript/registry.hpp"
#include "test_util.hpp"

using namespace eoscript;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Registry registry_with_mocks(std::map<std::string, std::vector<std::string>> extra = {}, double timeout_s = 30.0) {
  Registry reg = Registry::with_builtins();
  MockToolOptions opts;
  opts.executable = EOSCRIPT_MOCK_TOOL_PATH;
  opts.extra_args = std::move(extra);
  opts.timeout_s = timeout_s;
  for (auto& spec : mock_model_tools(opts)) reg.add(std::move(spec));
  return reg;
}

struct Call {
  fs::path dir = testutil::temp_dir("call");
  ToolContext ctx;
  std::vector<std::string> artifacts;
  std::vector<ToolCallRecord> log;
  Call() {
    ctx.scratch_dir = dir / "scratch";
    ctx.artifact_dir = dir / "artifacts";
    ctx.artifacts = &artifacts;
    fs::create_directories(ctx.scratch_dir);
    fs::create_directories(ctx.artifact_dir);
  }
  ~Call() { fs::remove_all(dir); }
  Value run(const Registry& reg, const std::string& name, std::vector<Value> args) {
    return invoke_tool(reg, name, args, ctx, log);
  }
};

ToolErrc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ToolError& e) {
    return e.code();
  }
  FAIL("expected ToolError");
  return ToolErrc::ToolFailed;
}

json valid_manifest(const std::string& name) {
  return {{"name", name},
          {"category", "model"},
          {"general_description", "Test tool."},
          {"technical_description",
           {{"text", "Input: image. Output: mask."}, {"args", {{{"name", "image"}, {"type", "image"}}}}, {"returns", "mask"}}},
          {"supported_sensors", {{{"sensor", "RGB aerial"}, {"normalization", "divide by 255"}}}},
          {"usage_example", "mask = " + name + "(get_uploaded_image_path())"},
          {"training_datasets", {{{"name", "FLAIR-2"}, {"taxonomy", {{"1", "building"}, {"8", "brushwood"}}}}}},
          {"binding", {{"type", "external"}, {"cmd", {EOSCRIPT_MOCK_TOOL_PATH, "--tool", "dofa_segmentation_tool"}}}}};
}

}  // namespace

TEST_SUITE("tool-registry") {
  TEST_CASE("builtins cover data access, indices and geo operators") {
    const Registry reg = Registry::with_builtins();
    for (const char* name : {"get_uploaded_image_path", "load_raster", "search_scenes", "fetch_scene", "reproject",
                             "make_tiles", "mosaic", "mask_area_m2", "ndvi", "savi", "evi", "ndwi", "wbi", "ndsi", "sr",
                             "nwi1", "nwi2"}) {
      INFO(name);
      CHECK(reg.contains(name));
    }
    for (const auto* spec : reg.tools()) CHECK(spec->category == ToolCategory::Data);
  }

  TEST_CASE("catalog rendering is deterministic and complete") {
    const Registry reg = registry_with_mocks();
    const auto a = render_prompt_catalog(reg);
    CHECK(a == render_prompt_catalog(registry_with_mocks()));
    CHECK(a.rfind("## Available tools (" + std::to_string(reg.size()) + ")", 0) == 0);
    for (const auto* spec : reg.tools()) CHECK(a.find("### " + spec->name + "\n") != std::string::npos);
    const auto seg = render_tool_block(*reg.find("dofa_segmentation_tool"));
    CHECK(seg.find("| 8 | brushwood |") != std::string::npos);
    CHECK(seg.find("| 11 | agricultural land |") != std::string::npos);
    CHECK(seg.find("Signature: dofa_segmentation_tool(image: image) -> mask") != std::string::npos);
  }

  TEST_CASE("manifest loading, duplicates and parse errors") {
    const auto dir = testutil::temp_dir("manifests");
    std::ofstream(dir / "a.json") << valid_manifest("extra_segmenter").dump();
    const Registry reg = load_registry(dir);
    CHECK(reg.contains("extra_segmenter"));
    CHECK(reg.find("extra_segmenter")->is_external());

    std::ofstream(dir / "b.json") << valid_manifest("extra_segmenter").dump();
    CHECK(error_code_of([&] { load_registry(dir); }) == ToolErrc::DuplicateToolName);
    fs::remove(dir / "b.json");

    std::ofstream(dir / "c.json") << "{ not json";
    CHECK(error_code_of([&] { load_registry(dir); }) == ToolErrc::ManifestParseError);
    fs::remove(dir / "c.json");

    auto bad = valid_manifest("Bad Name");
    std::ofstream(dir / "d.json") << bad.dump();
    CHECK(error_code_of([&] { load_registry(dir); }) == ToolErrc::ManifestParseError);
    fs::remove(dir / "d.json");

    auto no_desc = valid_manifest("no_description");
    no_desc["general_description"] = "";
    std::ofstream(dir / "e.json") << no_desc.dump();
    CHECK(error_code_of([&] { load_registry(dir); }) == ToolErrc::ManifestParseError);
    fs::remove_all(dir);

    CHECK(load_registry(dir / "missing").size() == Registry::with_builtins().size());
  }

  TEST_CASE("builtin invocation appends exactly one record") {
    const Registry reg = Registry::with_builtins();
    Call c;
    Raster r(2, 1, {"NIR", "RED"}, {{0.6F, 0.5F}, {0.2F, 0.5F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    const Value out = c.run(reg, "ndvi", {Value::raster(r)});
    REQUIRE(out.is(Value::Type::Raster));
    CHECK(out.as_raster().band_count() == 1);
    CHECK(out.as_raster().band(0)[0] == doctest::Approx(0.5));
    REQUIRE(c.log.size() == 1);
    CHECK(c.log[0].tool == "ndvi");
    CHECK(c.log[0].ok);

    CHECK(error_code_of([&] { c.run(reg, "no_such_tool", {}); }) == ToolErrc::UnknownTool);
    CHECK(c.log.size() == 2);
    CHECK(error_code_of([&] { c.run(reg, "ndvi", {Value::integer(3)}); }) == ToolErrc::ArgumentMismatch);
    CHECK(error_code_of([&] { c.run(reg, "ndvi", {}); }) == ToolErrc::ArgumentMismatch);
    CHECK(c.log.size() == 4);
    CHECK_FALSE(c.log.back().ok);
    Raster only_red(1, 1, {"RED"}, {{0.2F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    CHECK(error_code_of([&] { c.run(reg, "ndvi", {Value::raster(only_red)}); }) == ToolErrc::ToolFailed);
    CHECK(c.log.size() == 5);
  }

  TEST_CASE("argument digests depend on content, not location") {
    const auto dir = testutil::temp_dir("digest");
    Raster r(2, 2, {"A"}, {{1, 2, 3, 4}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    const auto p1 = save_raster(r, dir / "one");
    const auto p2 = save_raster(r, dir / "sub_two");
    const std::vector<Value> a{Value::string(p1.string())};
    const std::vector<Value> b{Value::string(p2.string())};
    CHECK(digest_args(a) == digest_args(b));
    const std::vector<Value> c{Value::raster(r)};
    CHECK(digest_args(c) == digest_args(std::vector<Value>{Value::raster(r)}));
    CHECK(digest_args(std::vector<Value>{Value::integer(1)}) != digest_args(std::vector<Value>{Value::integer(2)}));
    fs::remove_all(dir);
  }

  TEST_CASE("external segmentation over the wire") {
    const Registry reg = registry_with_mocks();
    Call c;
    testutil::write_solid_png(c.dir / "grey.png", 4, 3, 150, 150, 150);
    const Value out = c.run(reg, "dofa_segmentation_tool", {Value::string((c.dir / "grey.png").string())});
    REQUIRE(out.is(Value::Type::Mask));
    CHECK(out.as_mask().width() == 4);
    CHECK(out.as_mask().contains(8));
    CHECK(out.as_mask().count(8) == 12);
    REQUIRE(out.as_mask().legend().has_value());
    CHECK(out.as_mask().legend()->at(11) == "agricultural land");
    CHECK(out.as_mask().georef().has_value());
    CHECK(c.log.size() == 1);
  }

  TEST_CASE("external failure modes map to error codes") {
    Call c;
    testutil::write_solid_png(c.dir / "img.png", 2, 2, 10, 20, 30);
    const std::vector<Value> args{Value::string((c.dir / "img.png").string())};
    {
      const Registry reg = registry_with_mocks({{"dofa_segmentation_tool", {"--fail", "CUDA out of memory. Tried"}}});
      try {
        c.run(reg, "dofa_segmentation_tool", args);
        FAIL("expected failure");
      } catch (const ToolError& e) {
        CHECK(e.code() == ToolErrc::ToolFailed);
        CHECK(std::string(e.what()) == "CUDA out of memory. Tried");
      }
    }
    {
      const Registry reg = registry_with_mocks({{"dofa_segmentation_tool", {"--crash"}}});
      CHECK(error_code_of([&] { c.run(reg, "dofa_segmentation_tool", args); }) == ToolErrc::ToolCrashed);
    }
    {
      const Registry reg = registry_with_mocks({{"dofa_segmentation_tool", {"--garbage"}}});
      CHECK(error_code_of([&] { c.run(reg, "dofa_segmentation_tool", args); }) == ToolErrc::MalformedToolOutput);
    }
    {
      const Registry reg = registry_with_mocks({{"dofa_segmentation_tool", {"--bad-class"}}});
      CHECK(error_code_of([&] { c.run(reg, "dofa_segmentation_tool", args); }) == ToolErrc::MalformedToolOutput);
    }
    {
      const Registry reg = registry_with_mocks({{"dofa_segmentation_tool", {"--hang", "10"}}}, 0.5);
      const auto t0 = std::chrono::steady_clock::now();
      CHECK(error_code_of([&] { c.run(reg, "dofa_segmentation_tool", args); }) == ToolErrc::ToolTimeout);
      CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
    }
    CHECK(c.log.size() == 5);
    for (const auto& r : c.log) CHECK_FALSE(r.ok);
  }

  TEST_CASE("mock models are deterministic functions of the pixels") {
    Raster flat(3, 3, {"RED", "GREEN", "BLUE"}, {BandPlane(9, 0.5F), BandPlane(9, 0.5F), BandPlane(9, 0.5F)},
                GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg3857);
    CHECK(mock_detect(flat).empty());
    CHECK(mock_classify(flat) == mock_classify(flat));
    CHECK(mock_classify(flat) >= 0);
    CHECK(mock_classify(flat) < 10);
    const Mask m = mock_segment(flat);
    CHECK(m.count(1 + static_cast<int>(std::floor(0.5 * 13))) == 9);
    BandPlane ramp(9);
    for (int i = 0; i < 9; ++i) ramp[i] = static_cast<float>(i) / 9.0F;
    Raster varied(3, 3, {"RED", "GREEN", "BLUE"}, {ramp, ramp, ramp}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg3857);
    const auto d1 = mock_detect(varied);
    const auto d2 = mock_detect(varied);
    REQUIRE(d1.size() == d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
      CHECK(d1[i].cx == d2[i].cx);
      CHECK(d1[i].class_id >= 1);
      CHECK(d1[i].class_id <= 10);
      CHECK(d1[i].w >= 4.0);
    }
    Raster swir(2, 1, {"SWIR2"}, {{0.1F, 0.4F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326);
    const Mask burn = mock_burn_scar(swir, "SWIR2", 0.3);
    CHECK(burn.is_boolean());
    CHECK(burn.values() == std::vector<std::int32_t>{0, 1});
  }

  TEST_CASE("mock tool main speaks the wire protocol") {
    std::istringstream in(R"({"tool":"dofa_classification_tool","args":[]})");
    std::ostringstream out;
    std::ostringstream err;
    const int code = mock_tool_main({"--tool", "dofa_classification_tool"}, in, out, err);
    CHECK(code != 0);
    const auto doc = json::parse(out.str());
    CHECK(doc["status"] == "error");
  }
}

TEST_SUITE("data-tools") {
  TEST_CASE("local catalog search and fetch") {
    const auto dir = testutil::temp_dir("catalog");
    Raster r(2, 2, {"RED", "NIR"}, {{0.1F, 0.2F, 0.3F, 0.4F}, {0.5F, 0.6F, 0.7F, 0.8F}},
             GeoTransform{10.0, 0.01, 0, 45.02, 0, -0.01}, Crs::Epsg4326);
    save_raster(r, dir / "s1");
    json index = {{"scenes",
                   {{{"id", "S2_A"}, {"sensor", "sentinel-2"}, {"date", "2023-07-01"},
                     {"bounds", {10.0, 45.0, 10.02, 45.02}}, {"path", "s1.json"}},
                    {{"id", "S2_B"}, {"sensor", "sentinel-2"}, {"date", "2023-08-01"},
                     {"bounds", {20.0, 45.0, 20.02, 45.02}}, {"path", "s1.json"}}}}};
    std::ofstream(dir / "index.json") << index.dump();
    auto cat = std::make_shared<LocalCatalog>(dir / "index.json");
    const auto hits = cat->search(GeoBounds(9.9, 44.9, 10.1, 45.1, Crs::Epsg4326), {"2023-01-01", "2023-12-31"}, "");
    CHECK(hits == std::vector<std::string>{"S2_A"});
    CHECK(cat->fetch("S2_A").identical_to(r));
    CHECK_THROWS_AS(cat->fetch("nope"), CatalogError);

    const Registry reg = Registry::with_builtins();
    Call c;
    c.ctx.scenes = cat;
    const Value ids = c.run(reg, "search_scenes",
                            {Value::real(9.9), Value::real(44.9), Value::real(10.1), Value::real(45.1),
                             Value::string("2023-01-01"), Value::string("2023-12-31")});
    REQUIRE(ids.is(Value::Type::List));
    CHECK(ids.as_list().size() == 1);
    const Value scene = c.run(reg, "fetch_scene", {ids.as_list()[0]});
    CHECK(scene.as_raster().identical_to(r));
    fs::remove_all(dir);
  }

  TEST_CASE("uploads, json documents and saving artifacts") {
    const Registry reg = Registry::with_builtins();
    Call c;
    testutil::write_solid_png(c.dir / "u.png", 2, 2, 1, 2, 3);
    std::ofstream(c.dir / "claim.json") << R"({"claims":[{"amount": 12364.5}]})";
    c.ctx.attachments = {c.dir / "claim.json", c.dir / "u.png"};
    CHECK(c.run(reg, "get_uploaded_image_path", {}).as_string() == (c.dir / "u.png").string());
    const Value doc = c.run(reg, "get_uploaded_file_path", {Value::integer(0)});
    CHECK(c.run(reg, "read_json_value", {doc, Value::string("claims.0.amount")}).as_number() == 12364.5);
    CHECK(error_code_of([&] { c.run(reg, "get_uploaded_image_path", {Value::integer(3)}); }) == ToolErrc::ToolFailed);
    const Value img = c.run(reg, "load_raster", {Value::string((c.dir / "u.png").string())});
    const Value saved = c.run(reg, "save_raster", {img, Value::string("copy")});
    CHECK(c.artifacts.size() == 1);
    CHECK(load_raster(saved.as_string()).identical_to(img.as_raster()));
  }

  TEST_CASE("mask area and detection counting") {
    const Registry reg = Registry::with_builtins();
    Call c;
    Mask m(2, 1, {1, 0}, true, std::nullopt, Georef{GeoTransform{0, 1, 0, 1, 0, -1}, Crs::Epsg4326});
    const double a = c.run(reg, "mask_area_m2", {Value::mask(m), Value::integer(1)}).as_number();
    CHECK(a == doctest::Approx(1.2364e10).epsilon(1e-3));
    Mask bare(1, 1, {1});
    CHECK(error_code_of([&] { c.run(reg, "mask_area_m2", {Value::mask(bare), Value::integer(1)}); }) ==
          ToolErrc::ToolFailed);
    auto det = [](int cls) {
      return Value::list({Value::real(1), Value::real(1), Value::real(4), Value::real(4), Value::real(0),
                          Value::integer(cls), Value::real(0.9)});
    };
    const Value dets = Value::list({det(10), det(10), det(2)});
    CHECK(c.run(reg, "count_detections", {dets}).as_int() == 3);
    CHECK(c.run(reg, "count_detections", {dets, Value::integer(10)}).as_int() == 2);
  }
}
