#include <doctest.h>

#include <atomic>
#include <fstream>

#include "eoscript/controller.hpp"
#include "eoscript/mock_tools.hpp"
#include "test_util.hpp"

using namespace eoscript;
namespace fs = std::filesystem;

namespace {

const char* const kExample1 =
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "brushwood_present = 8 in segmented_mask\n"
    "print(brushwood_present)\n";

const char* const kExample2 =
    "uploaded_image_path = get_uploaded_image_path()\n"
    "segmented_mask = dofa_segmentation_tool(uploaded_image_path)\n"
    "agricultural_areas = (segmented_mask == 11).sum()\n"
    "print(agricultural_areas)\n";

const std::string kBrushwood = "Is there any brushwood in the uploaded image?";
const std::string kAgri = "List agricultural areas in the uploaded image.";

using Fixtures = std::map<std::string, std::vector<std::string>>;

Registry mock_registry(std::map<std::string, std::vector<std::string>> extra = {}) {
  Registry reg = Registry::with_builtins();
  MockToolOptions opts;
  opts.executable = EOSCRIPT_MOCK_TOOL_PATH;
  opts.extra_args = std::move(extra);
  for (auto& s : mock_model_tools(opts)) reg.add(std::move(s));
  return reg;
}

class CountingBackend : public LlmBackend {
 public:
  explicit CountingBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const CompletionRequest& r) const override {
    const auto n = calls_++;
    last_messages_ = r.messages.size();
    return replies_[std::min<std::size_t>(n, replies_.size() - 1)];
  }
  std::string describe() const override { return "counting"; }
  std::size_t calls() const { return calls_; }
  std::size_t last_messages() const { return last_messages_; }

 private:
  std::vector<std::string> replies_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::size_t last_messages_ = 0;
};

struct Env {
  fs::path dir = testutil::temp_dir("controller");
  ControllerConfig cfg;
  fs::path image = dir / "field.png";
  Env() {
    cfg.work_root = dir / "work";
    testutil::write_solid_png(image, 8, 8, 150, 150, 150);
  }
  ~Env() { fs::remove_all(dir); }
};

}  // namespace

TEST_SUITE("controller") {
  TEST_CASE("prompt carries the contract, the catalog and the uploads") {
    Registry two;
    for (auto& spec : builtin_tools()) {
      if (spec.name == "ndvi" || spec.name == "get_uploaded_image_path") two.add(spec);
    }
    const auto b = build_prompt(two, "What is the NDVI?", {"field.png"});
    CHECK(b.catalog_text.find("### ndvi") != std::string::npos);
    CHECK(b.catalog_text.find("### get_uploaded_image_path") != std::string::npos);
    CHECK(b.system_text.find(kContractCodeOnly) != std::string::npos);
    CHECK(b.system_text.find(kContractPrintResult) != std::string::npos);
    const auto msgs = prompt_messages(b);
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[1].content.find("field.png") != std::string::npos);
    CHECK(msgs[1].content.find("get_uploaded_image_path") != std::string::npos);
    const auto again = build_prompt(two, "What is the NDVI?", {"field.png"});
    CHECK(messages_digest(prompt_messages(again)) == messages_digest(msgs));
    CHECK_THROWS_AS(build_prompt(two, "  \n", {}), ControllerError);
  }

  TEST_CASE("generate_code returns the scripted completion and strips fences") {
    const auto reg = mock_registry();
    const auto bundle = build_prompt(reg, kBrushwood, {"field.png"});
    ScriptedBackend plain(Fixtures{{query_digest(kBrushwood), {kExample1}}});
    const auto g = generate_code(plain, bundle);
    CHECK(g.code == kExample1);
    CHECK_FALSE(g.fences_stripped);
    CHECK(g.origin == "llm");
    ScriptedBackend fenced(Fixtures{{query_digest(kBrushwood), {std::string("```python\n") + kExample1 + "```\n"}}});
    const auto f = generate_code(fenced, bundle);
    CHECK(f.code == kExample1);
    CHECK(f.fences_stripped);
    ScriptedBackend empty(Fixtures{});
    try {
      generate_code(empty, bundle);
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.code() == BackendErrc::Unavailable);
    }
    ScriptedBackend blank(Fixtures{{query_digest(kBrushwood), {"   \n"}}});
    try {
      generate_code(blank, bundle);
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.code() == BackendErrc::EmptyCompletion);
    }
  }

  TEST_CASE("brushwood question answers True and is reproducible") {
    Env env;
    const auto reg = mock_registry();
    ScriptedBackend backend(Fixtures{{query_digest(kBrushwood), {kExample1}}});
    const auto a = handle_query(reg, backend, kBrushwood, {env.image}, env.cfg);
    CHECK(a.outcome.status == OutcomeStatus::Success);
    CHECK(a.output == std::vector<std::string>{"True"});
    CHECK(a.script == kExample1);
    CHECK(a.verdict.calls_valid);
    CHECK(a.tool_calls.size() == 2);
    CHECK(a.attempts.size() == 1);
    const auto b = handle_query(reg, backend, kBrushwood, {env.image}, env.cfg);
    CHECK(a.id != b.id);
    CHECK(comparable_view(a) == comparable_view(b));
    const auto back = run_record_from_json(to_json(a));
    CHECK(to_json(back) == to_json(a));
  }

  TEST_CASE("a failing model tool yields a runtime error with valid code") {
    Env env;
    const std::string oom = "CUDA out of memory. Tried to allocate 20.00 MiB";
    const auto reg = mock_registry({{"dofa_segmentation_tool", {"--fail", oom}}});
    ScriptedBackend backend(Fixtures{{query_digest(kAgri), {kExample2}}});
    const auto r = handle_query(reg, backend, kAgri, {env.image}, env.cfg);
    CHECK(r.verdict.calls_valid);
    CHECK(r.outcome.status == OutcomeStatus::RuntimeError);
    CHECK(r.outcome.kind == "ToolError");
    CHECK(r.outcome.detail == "ToolFailed");
    CHECK(r.outcome.message == oom);
    CHECK(r.tool_calls.size() == 2);
    CHECK_FALSE(r.tool_calls.back().ok);
  }

  TEST_CASE("prose triggers one diagnostic-augmented retry") {
    Env env;
    const auto reg = mock_registry();
    CountingBackend backend({"Sure! Here is how you would do it.", kExample1});
    const auto r = handle_query(reg, backend, kBrushwood, {env.image}, env.cfg);
    CHECK(backend.calls() == 2);
    CHECK(backend.last_messages() == 4);
    REQUIRE(r.attempts.size() == 2);
    CHECK_FALSE(r.attempts[0].verdict.syntactically_valid);
    CHECK(r.outcome.status == OutcomeStatus::Success);

    CountingBackend stubborn({"Sure! Here is how you would do it."});
    const auto s = handle_query(reg, stubborn, kBrushwood, {env.image}, env.cfg);
    CHECK(stubborn.calls() == 2);
    CHECK(s.outcome.status == OutcomeStatus::ValidationFailure);
    CHECK(s.outcome.kind == "SyntaxError");
    CHECK(s.attempts.size() == 2);

    ControllerConfig no_retry = env.cfg;
    no_retry.max_retries = 0;
    CountingBackend once({"magic_tool()\n"});
    const auto t = handle_query(reg, once, kBrushwood, {env.image}, no_retry);
    CHECK(once.calls() == 1);
    CHECK(t.outcome.status == OutcomeStatus::ValidationFailure);
    CHECK(t.outcome.kind == "InvalidCalls");
    CHECK(t.tool_calls.empty());

    ControllerConfig three = env.cfg;
    three.max_retries = 3;
    CountingBackend many({"nope nope"});
    handle_query(reg, many, kBrushwood, {env.image}, three);
    CHECK(many.calls() == 4);
  }

  TEST_CASE("backend outages and empty queries are encoded in the outcome") {
    Env env;
    const auto reg = mock_registry();
    ScriptedBackend none(Fixtures{});
    const auto r = handle_query(reg, none, kBrushwood, {}, env.cfg);
    CHECK(r.outcome.status == OutcomeStatus::RuntimeError);
    CHECK(r.outcome.kind == "BackendUnavailable");
    RemoteConfig rc;
    rc.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    rc.model = "m";
    rc.timeout = std::chrono::seconds(2);
    RemoteBackend down(rc);
    CHECK(handle_query(reg, down, kBrushwood, {}, env.cfg).outcome.kind == "BackendUnavailable");
    const auto e = handle_query(reg, none, "", {}, env.cfg);
    CHECK(e.outcome.status == OutcomeStatus::ValidationFailure);
    CHECK(e.outcome.kind == "EmptyQuery");
  }

  TEST_CASE("scripted fixtures load from JSON") {
    Env env;
    std::ofstream(env.dir / "fx.json") << nlohmann::json{{query_digest("q1"), "print(1)\n"},
                                                         {query_digest("q2"), {"bad", "print(2)\n"}}}
                                              .dump();
    const auto b = ScriptedBackend::from_file(env.dir / "fx.json");
    CHECK(b.size() == 2);
    CompletionRequest r;
    r.query = "q2";
    r.attempt = 1;
    CHECK(b.complete(r) == "print(2)\n");
    r.attempt = 5;
    CHECK(b.complete(r) == "print(2)\n");
    std::ofstream(env.dir / "broken.json") << "[1]";
    CHECK_THROWS_AS(ScriptedBackend::from_file(env.dir / "broken.json"), BackendError);
  }
}
