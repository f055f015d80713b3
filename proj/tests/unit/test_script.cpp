#include <doctest.h>

#include <random>

#include "eoscript/mock_tools.hpp"
#include "eoscript/script/interpreter.hpp"
#include "eoscript/script/lexer.hpp"
#include "eoscript/script/parser.hpp"
#include "eoscript/script/printer.hpp"
#include "eoscript/script/validator.hpp"
#include "ast_gen.hpp"
#include "test_util.hpp"

using namespace eoscript;
using namespace eoscript::script;
namespace fs = std::filesystem;

namespace {

const char* const kWorkedExample1 =
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "brushwood_present = 8 in segmented_mask\n"
    "print(brushwood_present)\n";

const char* const kWorkedExample2 =
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "agricultural_areas = (segmented_mask == 11).sum()\n"
    "print(agricultural_areas)\n";

// Registry with a fixed 2x2 mask [[11,0],[11,5]] and a fixed single-band raster.
Registry fixture_registry() {
  Registry reg = Registry::with_builtins();
  ToolSpec m;
  m.name = "fixture_mask";
  m.general_description = "Fixed mask.";
  m.technical_description = "No input. Output: 2x2 mask.";
  m.signature = Signature{{}, "mask", false};
  m.binding = BuiltinFn([](std::span<const Value>, ToolContext&) { return Value::mask(Mask(2, 2, {11, 0, 11, 5})); });
  reg.add(m);
  ToolSpec r;
  r.name = "fixture_raster";
  r.general_description = "Fixed raster.";
  r.technical_description = "No input. Output: 1x3 raster, nodata -1.";
  r.signature = Signature{{}, "raster", false};
  r.binding = BuiltinFn([](std::span<const Value>, ToolContext&) {
    return Value::raster(Raster(3, 1, {"V"}, {{0.2F, -1.0F, 0.6F}}, GeoTransform{0, 1, 0, 0, 0, -1}, Crs::Epsg4326, -1.0F));
  });
  reg.add(r);
  return reg;
}

struct Run {
  fs::path dir = testutil::temp_dir("script");
  ExecutionContext ctx;
  Run() {
    ctx.scratch_dir = dir / "scratch";
    ctx.artifact_dir = dir / "artifacts";
    fs::create_directories(ctx.scratch_dir);
    fs::create_directories(ctx.artifact_dir);
  }
  ~Run() { fs::remove_all(dir); }
  ExecutionResult exec(const std::string& src, const Registry& reg) { return execute_program(parse_program(src), reg, ctx); }
};

std::vector<std::string> run_ok(const std::string& src) {
  static const Registry reg = fixture_registry();
  Run r;
  const auto res = r.exec(src, reg);
  if (!res.success) FAIL_CHECK("unexpected error: " << std::string(res.error->what()));
  return res.output;
}

ScriptError run_err(const std::string& src, const Limits& limits = {}) {
  static const Registry reg = fixture_registry();
  Run r;
  r.ctx.limits = limits;
  const auto res = r.exec(src, reg);
  REQUIRE_FALSE(res.success);
  return *res.error;
}


}  // namespace

TEST_SUITE("script-parser") {
  TEST_CASE("simple assignment") {
    const auto p = parse_program("x = 1\n");
    REQUIRE(p.statements.size() == 1);
    const auto& a = std::get<AssignStmt>(p.statements[0].node);
    CHECK(a.target == "x");
    CHECK(std::get<IntLit>(a.value->node).value == 1);
  }

  TEST_CASE("both worked examples parse into the expected statement shapes") {
    for (const char* src : {kWorkedExample1, kWorkedExample2}) {
      const auto p = parse_program(src);
      REQUIRE(p.statements.size() == 4);
      CHECK(std::holds_alternative<AssignStmt>(p.statements[0].node));
      CHECK(std::holds_alternative<AssignStmt>(p.statements[1].node));
      CHECK(std::holds_alternative<AssignStmt>(p.statements[2].node));
      CHECK(std::holds_alternative<ExprStmt>(p.statements[3].node));
    }
    const auto p = parse_program(kWorkedExample1);
    const auto& cmp = std::get<BinaryExpr>(std::get<AssignStmt>(p.statements[2].node).value->node);
    CHECK(cmp.op == BinaryOp::In);
    CHECK(print_program(p) == kWorkedExample1);
    CHECK(print_program(parse_program(kWorkedExample2)) == kWorkedExample2);
  }

  TEST_CASE("constructs outside the dialect are syntax errors") {
    for (const char* src : {"def f(): pass\n", "import os\n", "for x in y:\n  print(x)\n", "f(a=1)\n", "x.y\n",
                            "(1, 2)\n", "x = \n", "print(1\n", "x = 'unterminated\n", "a b\n", "1 = x\n",
                            "lambda: 0\n", "x = None\n"}) {
      INFO(src);
      CHECK_THROWS_AS(parse_program(src), SyntaxError);
    }
  }

  TEST_CASE("syntax errors carry a position") {
    try {
      parse_program("x = 1\ny = 2 +\nz = 3\n");
      FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
      CHECK(e.line() == 2);
      CHECK(e.col() >= 1);
    }
  }

  TEST_CASE("comments, blank lines and single quotes") {
    const auto p = parse_program("# header\n\nx = 'a'  # trailing\nprint(x)\n");
    CHECK(p.statements.size() == 2);
  }

  TEST_CASE("precedence and associativity") {
    CHECK(print_program(parse_program("a - b - c\n")) == "a - b - c\n");
    CHECK(print_program(parse_program("a - (b - c)\n")) == "a - (b - c)\n");
    CHECK(print_program(parse_program("(a + b) * c\n")) == "(a + b) * c\n");
    CHECK(print_program(parse_program("((a))\n")) == "a\n");
    CHECK(print_program(parse_program("a < b == c\n")) == "a < b == c\n");
    CHECK(print_program(parse_program("-(a + b)\n")) == "-(a + b)\n");
    CHECK(print_program(parse_program("-f(x)\n")) == "-f(x)\n");
  }

  TEST_CASE("code fences are stripped and reported") {
    const auto r = strip_code_fences("```python\nprint(1)\n```\n");
    CHECK(r.stripped);
    CHECK(r.code == "print(1)\n");
    const auto plain = strip_code_fences("print(1)\n");
    CHECK_FALSE(plain.stripped);
    CHECK(plain.code == "print(1)\n");
  }

  TEST_CASE("print-parse round trip on 1000 random programs") {
    testgen::AstGen gen(12345);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
      const Program p = gen.program();
      const std::string text = print_program(p);
      Program back;
      try {
        back = parse_program(text);
      } catch (const SyntaxError& e) {
        FAIL("printed program failed to parse: " << e.what() << "\n" << text);
      }
      if (!same_program(p, back)) FAIL("round trip changed the AST:\n" << text);
      CHECK(print_program(back) == text);
      ++checked;
    }
    CHECK(checked == 1000);
  }
}

TEST_SUITE("script-validator") {
  TEST_CASE("worked examples validate against the mock registry") {
    Registry reg = Registry::with_builtins();
    MockToolOptions opts;
    opts.executable = EOSCRIPT_MOCK_TOOL_PATH;
    for (auto& s : mock_model_tools(opts)) reg.add(std::move(s));
    for (const char* src : {kWorkedExample1, kWorkedExample2}) {
      const auto v = check_source(src, reg);
      CHECK(v.syntactically_valid);
      CHECK(v.calls_valid);
      CHECK(v.diagnostics.empty());
    }
  }

  TEST_CASE("hallucinated tools and other invalid calls") {
    const Registry reg = Registry::with_builtins();
    auto diag = [&](const std::string& src) {
      const auto v = check_source(src, reg);
      CHECK(v.syntactically_valid);
      CHECK_FALSE(v.calls_valid);
      return format_diagnostics(v.diagnostics);
    };
    CHECK(diag("magic_tool()\n").find("unknown tool") != std::string::npos);
    CHECK(diag("x = 1\nx.median()\n").find("median") != std::string::npos);
    CHECK(diag("ndvi()\n").find("ndvi") != std::string::npos);
    CHECK(diag("print(y)\n").find("'y'") != std::string::npos);
    CHECK(diag("ndvi = 3\n").find("ndvi") != std::string::npos);
    CHECK(diag("x = ndvi\n").find("ndvi") != std::string::npos);
    CHECK(diag("x = 1\nx(2)\n").find("'x'") != std::string::npos);
    CHECK(diag("make_tiles(1, 2, 3)\n").find("make_tiles") != std::string::npos);
    CHECK_FALSE(check_source("", reg).calls_valid);
  }

  TEST_CASE("valid forms") {
    const Registry reg = Registry::with_builtins();
    for (const char* src : {"print()\n", "x = 2\nprint(abs(-x), round(2.5), len([1, 2]))\n",
                            "p = get_uploaded_image_path()\nprint(ndvi(p))\n", "print([1, 2].sum())\n"}) {
      INFO(src);
      CHECK(check_source(src, reg).calls_valid);
    }
  }

  TEST_CASE("syntax errors become diagnostics") {
    const auto v = check_source("def f(): pass\n", Registry::with_builtins());
    CHECK_FALSE(v.syntactically_valid);
    CHECK_FALSE(v.calls_valid);
    REQUIRE(v.diagnostics.size() == 1);
    CHECK(v.diagnostics[0].message.rfind("SyntaxError", 0) == 0);
  }

  TEST_CASE("soundness: valid programs never hit UnknownTool or arity errors") {
    const Registry reg = fixture_registry();
    std::mt19937_64 rng(77);
    const char* callees[] = {"fixture_mask", "fixture_raster", "count_detections", "abs", "len", "print",
                             "imaginary_tool", "ndvi", "segment_everything"};
    const char* args[] = {"", "1", "[]", "x", "\"s\"", "1, 2", "fixture_mask()"};
    int valid = 0;
    for (int i = 0; i < 300; ++i) {
      std::string src = "x = [1, 2]\n";
      const int n = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < n; ++k) {
        src += std::string("y") + std::to_string(k) + " = " + callees[rng() % 9] + "(" + args[rng() % 7] + ")\n";
      }
      const auto v = check_source(src, reg);
      if (!v.calls_valid) continue;
      ++valid;
      Run r;
      const auto res = r.exec(src, reg);
      if (res.error && res.error->kind() == ErrorKind::ToolError) {
        INFO(src);
        CHECK(res.error->detail() != "UnknownTool");
        CHECK(std::string(res.error->what()).find("argument(s), got") == std::string::npos);
      }
    }
    CHECK(valid > 20);
  }
}

TEST_SUITE("script-interpreter") {
  TEST_CASE("mask comparison, membership and counting") {
    CHECK(run_ok("m = fixture_mask()\nprint((m == 11).sum())\n") == std::vector<std::string>{"2"});
    CHECK(run_ok("m = fixture_mask()\nprint(5 in m, 8 in m)\n") == std::vector<std::string>{"True False"});
    CHECK(run_ok("m = fixture_mask()\nprint(m.count(11), (m != 0).mean())\n") == std::vector<std::string>{"2 0.75"});
    CHECK(run_ok("r = fixture_raster()\nprint((r > 0.5).sum(), (r > 0.1).sum())\n") == std::vector<std::string>{"1 2"});
  }

  TEST_CASE("arithmetic follows Python conventions") {
    CHECK(run_ok("print(7 / 2, 6 / 3, 2 * 3 + 1, -2 - 3)\n") == std::vector<std::string>{"3.5 2.0 7 -5"});
    CHECK(run_ok("print(\"ab\" * 2 + \"c\", [1] * 3, 1 == 1.0)\n") == std::vector<std::string>{"ababc [1, 1, 1] True"});
    CHECK(run_ok("x = [3, 4, 5]\nprint(x[0] + x[-1], len(\"abc\"), abs(-2.5), round(2.567, 2))\n") ==
          std::vector<std::string>{"8 3 2.5 2.57"});
    CHECK(run_ok("print(1 < 2 == True)\n") == std::vector<std::string>{"True"});
    CHECK(run_ok("print(\"b\" in \"abc\", 2 in [1, 2], [1, 2].sum(), [2, 4].mean())\n") ==
          std::vector<std::string>{"True True 3 3.0"});
  }

  TEST_CASE("runtime errors by kind") {
    CHECK(run_err("print(y)\n").kind() == ErrorKind::NameError);
    CHECK(run_err("print(1 + \"a\")\n").kind() == ErrorKind::TypeError);
    CHECK(run_err("x = [1]\nprint(x[3])\n").kind() == ErrorKind::IndexError);
    CHECK(run_err("print(1 / 0)\n").kind() == ErrorKind::ZeroDivisionError);
    CHECK(run_err("print([].mean())\n").kind() == ErrorKind::ValueError);
    CHECK(run_err("print(9223372036854775807 + 1)\n").kind() == ErrorKind::ValueError);
    const auto e = run_err("x = 1\nprint(y)\n");
    CHECK(e.span().line == 2);
    CHECK(std::string(e.what()) == "NameError: name 'y' is not defined");
  }

  TEST_CASE("output produced before an error is kept") {
    static const Registry reg = fixture_registry();
    Run r;
    const auto res = r.exec("print(1)\nprint(z)\n", reg);
    CHECK_FALSE(res.success);
    CHECK(res.output == std::vector<std::string>{"1"});
  }

  TEST_CASE("every resource limit triggers on its crafted program") {
    const auto steps = run_err("x = [0] * 600000\ny = x + x\n");
    CHECK(steps.kind() == ErrorKind::ResourceLimit);
    CHECK(steps.detail() == kLimitSteps);

    const auto store = run_err("s = \"a\" * 300000000\n");
    CHECK(store.kind() == ErrorKind::ResourceLimit);
    CHECK(store.detail() == kLimitValueStore);

    const auto huge = run_err("x = [0] * 1000000000\n");
    CHECK(huge.kind() == ErrorKind::ResourceLimit);
    CHECK(huge.detail() == kLimitValueStore);

    std::string calls;
    for (int i = 0; i < 17; ++i) calls += "n = count_detections([])\n";
    const auto tools = run_err(calls);
    CHECK(tools.kind() == ErrorKind::ResourceLimit);
    CHECK(tools.detail() == kLimitToolCalls);

    Limits tight;
    tight.wall_clock = std::chrono::milliseconds(300);
    tight.max_steps = 1'000'000'000;
    const auto clock = run_err("x = [0] * 20000000\ny = x + x\nz = y + y\nw = z + z\n", tight);
    CHECK(clock.kind() == ErrorKind::ResourceLimit);
    const bool clock_or_store = clock.detail() == kLimitWallClock || clock.detail() == kLimitValueStore;
    CHECK(clock_or_store);
  }

  TEST_CASE("wall clock bounds a hanging tool") {
    Registry reg = Registry::with_builtins();
    MockToolOptions opts;
    opts.executable = EOSCRIPT_MOCK_TOOL_PATH;
    opts.extra_args["dofa_classification_tool"] = {"--hang", "30"};
    for (auto& s : mock_model_tools(opts)) reg.add(std::move(s));
    Run r;
    testutil::write_solid_png(r.dir / "a.png", 2, 2, 1, 2, 3);
    r.ctx.attachments = {r.dir / "a.png"};
    r.ctx.limits.wall_clock = std::chrono::milliseconds(800);
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = r.exec("p = get_uploaded_image_path()\nprint(dofa_classification_tool(p))\n", reg);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
    REQUIRE_FALSE(res.success);
    CHECK(res.error->kind() == ErrorKind::ResourceLimit);
    CHECK(res.error->detail() == kLimitWallClock);
    CHECK(res.tool_calls.size() == 2);
  }

  TEST_CASE("tool errors keep the tool's message verbatim") {
    const auto e = run_err("ndvi(fixture_mask())\n");
    CHECK(e.kind() == ErrorKind::ToolError);
    CHECK(e.detail() == "ArgumentMismatch");
  }

  TEST_CASE("resource usage is reported") {
    static const Registry reg = fixture_registry();
    Run r;
    const auto res = r.exec("m = fixture_mask()\nprint(m.sum())\n", reg);
    CHECK(res.success);
    CHECK(res.resources.steps > 0);
    CHECK(res.resources.tool_calls == 1);
    CHECK(res.resources.peak_value_store_bytes > 0);
  }
}
