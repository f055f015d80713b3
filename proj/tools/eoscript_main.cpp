#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eoscript/catalog.hpp"
#include "eoscript/controller.hpp"
#include "eoscript/eval/harness.hpp"
#include "eoscript/eval/metrics.hpp"
#include "eoscript/mock_tools.hpp"
#include "eoscript/run_store.hpp"
#include "eoscript/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eoscript;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

struct Setup {
  std::string registry_dir = env_or("EOSCRIPT_REGISTRY_DIR", "");
  std::string backend = env_or("EOSCRIPT_BACKEND", "scripted");
  std::string fixtures = env_or("EOSCRIPT_FIXTURES", "");
  std::string mock_tool = env_or("EOSCRIPT_MOCK_TOOL", EOSCRIPT_DEFAULT_MOCK_TOOL);
  std::vector<std::string> mock_fail;
  std::string catalog = env_or("EOSCRIPT_CATALOG", "");
  std::string data_dir = env_or("EOSCRIPT_DATA_DIR", "eoscript-data");
  int retries = std::stoi(env_or("EOSCRIPT_MAX_RETRIES", "1"));

  void add_options(CLI::App* app, bool with_backend) {
    app->add_option("--registry-dir", registry_dir, "directory of tool manifests (EOSCRIPT_REGISTRY_DIR)");
    app->add_option("--mock-tool", mock_tool, "path of the eo-mock-tool executable; empty disables model tools");
    app->add_option("--mock-fail", mock_fail, "TOOL=MESSAGE: make a mock model tool fail with MESSAGE");
    app->add_option("--catalog", catalog, "local scene catalog index (EOSCRIPT_CATALOG)");
    if (with_backend) {
      app->add_option("--backend", backend, "scripted or remote (EOSCRIPT_BACKEND)")
          ->check(CLI::IsMember({"scripted", "remote"}));
      app->add_option("--fixtures", fixtures, "scripted completions JSON (EOSCRIPT_FIXTURES)");
      app->add_option("--data-dir", data_dir, "runs, uploads and work files (EOSCRIPT_DATA_DIR)");
      app->add_option("--retries", retries, "regeneration attempts after invalid code")->check(CLI::NonNegativeNumber);
    }
  }

  Registry registry() const {
    Registry reg = registry_dir.empty() ? Registry::with_builtins() : load_registry(registry_dir);
    if (!mock_tool.empty() && fs::exists(mock_tool)) {
      MockToolOptions opts;
      opts.executable = mock_tool;
      for (const auto& f : mock_fail) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--mock-fail", "expected TOOL=MESSAGE");
        opts.extra_args[f.substr(0, eq)] = {"--fail", f.substr(eq + 1)};
      }
      for (auto& spec : mock_model_tools(opts)) reg.add(std::move(spec));
    }
    return reg;
  }

  std::shared_ptr<const LlmBackend> make_backend() const {
    if (backend == "remote") return std::make_shared<RemoteBackend>(RemoteConfig::from_env());
    if (fixtures.empty()) throw CLI::ValidationError("--fixtures", "the scripted backend needs a fixture file");
    return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(fixtures));
  }

  ControllerConfig controller() const {
    ControllerConfig c;
    c.max_retries = retries;
    c.work_root = fs::path(data_dir) / "work";
    if (!catalog.empty()) c.scenes = std::make_shared<LocalCatalog>(catalog);
    return c;
  }
};

void print_record_summary(const RunRecord& r) {
  std::cout << "run " << r.id << "\n--- code ---\n" << r.script;
  if (!r.script.empty() && r.script.back() != '\n') std::cout << "\n";
  std::cout << "--- output ---\n";
  for (const auto& line : r.output) std::cout << line << "\n";
  std::cout << "--- outcome: " << to_string(r.outcome.status);
  if (r.outcome.status != OutcomeStatus::Success) std::cout << " (" << r.outcome.kind << ")\n" << r.outcome.message;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tool-script agent for Earth observation questions"};
  app.require_subcommand(1);
  Setup setup;

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  setup.add_options(serve, true);
  ServiceConfig service_cfg = ServiceConfig::from_env();
  serve->add_option("--host", service_cfg.host, "bind address (EOSCRIPT_HOST)");
  serve->add_option("--port", service_cfg.port, "port (EOSCRIPT_PORT)");

  auto* query = app.add_subcommand("query", "answer one question and print the run");
  setup.add_options(query, true);
  std::string text;
  std::vector<std::string> attach;
  bool as_json = false;
  query->add_option("--text", text, "the question")->required();
  query->add_option("--attach", attach, "uploaded files for the question");
  query->add_flag("--json", as_json, "print the full run record");

  auto* tools = app.add_subcommand("tools", "inspect the tool registry");
  tools->require_subcommand(1);
  auto* tools_list = tools->add_subcommand("list", "print the tool catalog");
  setup.add_options(tools_list, false);
  bool tools_json = false;
  tools_list->add_flag("--json", tools_json, "machine-readable tool descriptions");

  auto* runs = app.add_subcommand("runs", "inspect stored runs");
  runs->require_subcommand(1);
  std::string runs_dir = fs::path(env_or("EOSCRIPT_DATA_DIR", "eoscript-data")) / "runs";
  auto* runs_show = runs->add_subcommand("show", "print one stored run record");
  std::string run_id;
  runs_show->add_option("id", run_id, "run id")->required();
  runs_show->add_option("--runs-dir", runs_dir, "run log directory");
  auto* runs_list = runs->add_subcommand("list", "list stored runs, newest first");
  runs_list->add_option("--runs-dir", runs_dir, "run log directory");

  auto* eval = app.add_subcommand("eval", "evaluation");
  eval->require_subcommand(1);
  auto* eval_final = eval->add_subcommand("final", "final-answer accuracy over question datasets");
  setup.add_options(eval_final, true);
  std::vector<std::string> datasets;
  std::string report_path;
  std::string runs_out;
  std::size_t concurrency = 4;
  eval_final->add_option("--dataset", datasets, "JSON-lines question file (repeatable)")->required();
  eval_final->add_option("--report", report_path, "write the JSON report here");
  eval_final->add_option("--runs-out", runs_out, "store every run record here");
  eval_final->add_option("--concurrency", concurrency, "questions evaluated in parallel")->check(CLI::PositiveNumber);

  auto* eval_tools = eval->add_subcommand("tools", "tool-level metric from prediction and truth files");
  std::string task;
  std::string pred;
  std::string truth;
  int num_classes = 0;
  eval_tools->add_option("--task", task, "cls, seg, det or burn")->required()->check(
      CLI::IsMember({"cls", "seg", "det", "burn"}));
  eval_tools->add_option("--pred", pred, "predictions")->required()->check(CLI::ExistingFile);
  eval_tools->add_option("--truth", truth, "ground truth")->required()->check(CLI::ExistingFile);
  eval_tools->add_option("--num-classes", num_classes, "ignore class ids at or above this (seg)");

  auto* eval_llm = eval->add_subcommand("llm", "code validity and execution success over run records");
  std::string llm_runs;
  eval_llm->add_option("--runs", llm_runs, "directory of run records")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      service_cfg.data_dir = setup.data_dir;
      service_cfg.controller = setup.controller();
      Service service(setup.registry(), setup.make_backend(), service_cfg);
      std::cerr << "listening on " << service_cfg.host << ":" << service_cfg.port << "\n";
      return service.serve() ? 0 : 1;
    }
    if (*query) {
      const auto reg = setup.registry();
      const auto backend = setup.make_backend();
      std::vector<fs::path> files(attach.begin(), attach.end());
      const RunRecord record = handle_query(reg, *backend, text, files, setup.controller());
      RunStore(fs::path(setup.data_dir) / "runs").save(record);
      if (as_json) {
        std::cout << serialize_record(record);
      } else {
        print_record_summary(record);
      }
      return record.outcome.status == OutcomeStatus::Success ? 0 : 2;
    }
    if (*tools_list) {
      const auto reg = setup.registry();
      if (tools_json) {
        json out = json::array();
        for (const auto* spec : reg.tools()) out.push_back(to_manifest_json(*spec));
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << render_prompt_catalog(reg);
      }
      return 0;
    }
    if (*runs_show) {
      const auto text_out = RunStore(runs_dir).load_text(run_id);
      if (!text_out) {
        std::cerr << "run '" << run_id << "' not found in " << runs_dir << "\n";
        return 1;
      }
      std::cout << *text_out;
      return 0;
    }
    if (*runs_list) {
      for (const auto& s : RunStore(runs_dir).summaries()) {
        std::cout << s["id"].get<std::string>() << "  " << s["outcome"].get<std::string>() << "  "
                  << s["query"].get<std::string>() << "\n";
      }
      return 0;
    }
    if (*eval_final) {
      const auto reg = setup.registry();
      const auto backend = setup.make_backend();
      const auto cfg = setup.controller();
      eval::FinalAnswerReport all;
      for (const auto& d : datasets) {
        auto part = eval::eval_final_answers(eval::load_dataset(d), reg, *backend, cfg, concurrency);
        for (const auto& [s, score] : part.scenarios) {
          all.scenarios[s].correct += score.correct;
          all.scenarios[s].total += score.total;
        }
        for (auto& v : part.verdicts) all.verdicts.push_back(std::move(v));
        for (auto& r : part.records) all.records.push_back(std::move(r));
      }
      const auto llm = eval::eval_llm_level(all.records);
      if (!runs_out.empty()) {
        RunStore store(runs_out);
        for (const auto& r : all.records) store.save(r);
      }
      std::cout << eval::render_final_table(all) << "\n" << eval::render_llm_table(llm);
      if (!report_path.empty()) {
        json report = to_json(all);
        report["llm_level"] = to_json(llm);
        std::ofstream(report_path) << report.dump(2) << "\n";
      }
      return 0;
    }
    if (*eval_tools) {
      const json r = eval::eval_tool_task(task, pred, truth, num_classes);
      std::cout << eval::render_tool_table({r}) << "\n" << r.dump(2) << "\n";
      return 0;
    }
    if (*eval_llm) {
      const auto r = eval::eval_llm_level(eval::load_run_records(llm_runs));
      std::cout << eval::render_llm_table(r) << "\n" << to_json(r).dump(2) << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
