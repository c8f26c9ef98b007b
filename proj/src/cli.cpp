#include "docplan/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "docplan/corpusforge.hpp"
#include "docplan/error.hpp"
#include "docplan/evaluator.hpp"
#include "docplan/llmclient.hpp"
#include "docplan/progdsl.hpp"
#include "docplan/promptkit.hpp"
#include "docplan/registry.hpp"
#include "docplan/retriever.hpp"
#include "docplan/text.hpp"

namespace docplan::cli {

namespace fs = std::filesystem;

namespace {

std::set<std::string> split_set(const std::string& csv) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    std::string item(text::trim(std::string_view(csv).substr(start, comma - start)));
    if (!item.empty()) out.insert(std::move(item));
    start = comma + 1;
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", "IoError", "cannot write " + path.string());
  out << content;
}

bool parse_yes_no(const std::string& v) {
  if (v == "yes" || v == "true" || v == "1") return true;
  if (v == "no" || v == "false" || v == "0") return false;
  throw Error("cli", "ConfigError", "expected yes/no, got '" + v + "'");
}

// Flags shared by eval and sweep.
struct EvalFlags {
  std::string benchmark;
  std::string corpus;
  std::string index;
  std::string docs = "no";
  std::size_t shots = 0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t top_k = 10;
  std::size_t doc_words = 600;
  std::size_t prompt_budget = 0;
  std::string backend = "stub-oracle";
  std::string match = "exact";
  std::string prompt_template;
  std::string replay_log;
  std::size_t workers = 4;
  double temperature = 0.0;
  int max_tokens = 512;
  long timeout_ms = 60'000;
  int retries = 3;
  std::string endpoint;
  std::string model;

  void attach(CLI::App* app) {
    app->add_option("--benchmark", benchmark, "Benchmark JSON")->required()->check(CLI::ExistingFile);
    app->add_option("--corpus", corpus, "Tool corpus (JSON lines)")->check(CLI::ExistingFile);
    app->add_option("--index", index, "Serialized retrieval index")->check(CLI::ExistingFile);
    app->add_option("--docs", docs, "Include retrieved documentation (yes/no)")->capture_default_str();
    app->add_option("--shots", shots, "Number of demos")->capture_default_str();
    app->add_option("--trials", trials, "Demo-selection trials")->capture_default_str();
    app->add_option("--seed", seed, "Root seed")->capture_default_str();
    app->add_option("--top-k", top_k, "Documents retrieved per question")->capture_default_str();
    app->add_option("--doc-words", doc_words, "Words kept per retrieved document")->capture_default_str();
    app->add_option("--prompt-budget", prompt_budget, "Total documentation words (0 = unlimited)")
        ->capture_default_str();
    app->add_option("--backend", backend, "http | stub-oracle | stub-docgrep | stub-demoecho")->capture_default_str();
    app->add_option("--match", match, "exact | placeholder-wildcard")->capture_default_str();
    app->add_option("--template", prompt_template, "Prompt template override")->check(CLI::ExistingFile);
    app->add_option("--replay-log", replay_log, "Write request/completion log here");
    app->add_option("--workers", workers, "Parallel tasks")->capture_default_str();
    app->add_option("--temperature", temperature)->capture_default_str();
    app->add_option("--max-tokens", max_tokens)->capture_default_str();
    app->add_option("--timeout-ms", timeout_ms)->capture_default_str();
    app->add_option("--retries", retries)->capture_default_str();
    app->add_option("--endpoint", endpoint, "HTTP endpoint (default: $DOCPLAN_ENDPOINT)");
    app->add_option("--model", model, "Model name sent with http requests");
  }

  eval::EvalSettings settings() const {
    eval::EvalSettings s;
    s.condition.use_docs = parse_yes_no(docs);
    s.condition.shots = shots;
    s.condition.retrieval.top_k = top_k;
    s.condition.retrieval.doc_word_limit = doc_words;
    s.condition.retrieval.prompt_budget_words = prompt_budget;
    s.trials = trials;
    s.root_seed = seed;
    s.match_mode = eval::parse_match_mode(match);
    s.workers = workers;
    s.planner.backend = planner::parse_backend(backend);
    s.planner.temperature = temperature;
    s.planner.max_output_tokens = max_tokens;
    s.planner.request_timeout = std::chrono::milliseconds(timeout_ms);
    s.planner.max_retries = retries;
    s.planner.endpoint = endpoint;
    s.planner.model = model;
    s.planner.max_in_flight = workers;
    if (!prompt_template.empty()) s.prompt_template = prompt::PromptTemplate::load(prompt_template);
    s.extra = {{"benchmark", benchmark}, {"corpus", corpus}, {"index", index}, {"template", prompt_template}};
    return s;
  }
};

struct LoadedInputs {
  forge::Benchmark benchmark;
  ToolRegistry registry;
  std::optional<retrieval::RetrievalIndex> index;
};

LoadedInputs load_inputs(const EvalFlags& flags, const eval::EvalSettings& settings) {
  LoadedInputs in;
  in.benchmark = forge::read_benchmark(flags.benchmark);
  if (!flags.corpus.empty()) in.registry = read_tool_corpus(fs::path(flags.corpus));
  const bool needs_docs = settings.condition.use_docs || settings.planner.backend == planner::Backend::StubDocgrep;
  if (needs_docs && flags.corpus.empty()) {
    throw Error("cli", "ConfigError", "--corpus is required with --docs yes or the stub-docgrep backend");
  }
  if (!flags.index.empty()) in.index = retrieval::RetrievalIndex::load(flags.index);
  return in;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"docplan: documentation-grounded tool-use planning and evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // forge
  auto* forge_cmd = app.add_subcommand("forge", "Rename a raw doc corpus and tasks into an unseen benchmark");
  std::string map_path, raw_dir, tasks_path, bench_out, tools_out, forbid = "gcloud,gsutil", passthrough = "ffmpeg";
  std::uint64_t forge_seed = 0;
  forge_cmd->add_option("--map", map_path, "Rename map JSON")->required()->check(CLI::ExistingFile);
  forge_cmd->add_option("--corpus", raw_dir, "Raw documentation directory")->required()->check(CLI::ExistingDirectory);
  forge_cmd->add_option("--tasks", tasks_path, "Source tasks JSON")->required()->check(CLI::ExistingFile);
  forge_cmd->add_option("--out", bench_out, "Benchmark JSON to write")->required();
  forge_cmd->add_option("--tools-out", tools_out, "Renamed tool corpus (default: <out>.tools.jsonl)");
  forge_cmd->add_option("--forbid", forbid, "Comma-separated forbidden source tokens")->capture_default_str();
  forge_cmd->add_option("--passthrough", passthrough, "Comma-separated allowed non-tool programs")
      ->capture_default_str();
  forge_cmd->add_option("--seed", forge_seed, "Recorded creation seed")->capture_default_str();

  // index
  auto* index_cmd = app.add_subcommand("index", "Build and serialize a TF-IDF index over a tool corpus");
  std::string index_corpus, index_out;
  retrieval::RetrievalConfig index_config;
  index_cmd->add_option("--corpus", index_corpus, "Tool corpus (JSON lines)")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--out", index_out, "Index file to write")->required();
  index_cmd->add_option("--top-k", index_config.top_k)->capture_default_str();
  index_cmd->add_option("--doc-words", index_config.doc_word_limit)->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate one prompting condition");
  EvalFlags eval_flags;
  std::string eval_out;
  eval_flags.attach(eval_cmd);
  eval_cmd->add_option("--out", eval_out, "Report JSON (default: stdout)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate along one axis (doc_words or shots)");
  EvalFlags sweep_flags;
  std::string axis, values, sweep_out_dir;
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "doc_words | shots")->required();
  sweep_cmd->add_option("--values", values, "e.g. 100..800:100 or 0,5,10,15")->required();
  sweep_cmd->add_option("--out-dir", sweep_out_dir, "Directory for sweep.csv and per-point reports")->required();

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Re-score a replay log without a backend");
  std::string replay_bench, replay_log, replay_match = "exact", replay_out;
  replay_cmd->add_option("--benchmark", replay_bench)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--log", replay_log)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--match", replay_match)->capture_default_str();
  replay_cmd->add_option("--out", replay_out, "Report JSON (default: stdout)");

  // dsl
  auto* dsl_cmd = app.add_subcommand("dsl", "Parse and execute a program against mock module fixtures");
  std::string program_path, fixtures_path;
  std::vector<std::string> input_flags;
  bool render_only = false;
  dsl_cmd->add_option("--program", program_path)->required()->check(CLI::ExistingFile);
  dsl_cmd->add_option("--fixtures", fixtures_path)->check(CLI::ExistingFile);
  dsl_cmd->add_option("--input", input_flags, "NAME=VALUE (VALUE parsed as JSON, else taken as a string)");
  dsl_cmd->add_flag("--render", render_only, "Print the canonical program and exit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << nlohmann::json{{"error", {{"module", "cli"}, {"kind", "ConfigError"}, {"message", e.what()}}}}.dump()
        << '\n';
    return kConfigError;
  }

  try {
    if (*forge_cmd) {
      forge::ForgeOptions options;
      options.forbidden = split_set(forbid);
      options.passthrough = split_set(passthrough);
      options.source_corpus = fs::path(raw_dir).lexically_normal().filename().string();
      if (options.source_corpus.empty()) options.source_corpus = fs::path(raw_dir).lexically_normal().parent_path().filename().string();
      options.creation_seed = forge_seed;
      const forge::RenameMap map = forge::read_rename_map(map_path);
      const ToolRegistry source_registry = forge::ingest_raw_corpus(raw_dir);
      const forge::SourceTasks source = forge::read_source_tasks(tasks_path);
      forge::ForgeResult result = forge::build_benchmark(source, map, source_registry, options);
      const fs::path tools_path = tools_out.empty() ? fs::path(bench_out + ".tools.jsonl") : fs::path(tools_out);
      write_file(bench_out, forge::to_json(result.benchmark).dump(2) + "\n");
      if (tools_path.has_parent_path()) fs::create_directories(tools_path.parent_path());
      write_tool_corpus(result.registry, tools_path);
      out << nlohmann::json{{"benchmark", bench_out},
                            {"tools", tools_path.string()},
                            {"n_tasks", result.benchmark.tasks.size()},
                            {"n_tools", result.registry.size()},
                            {"rename_map_digest", result.benchmark.metadata.rename_map_digest},
                            {"leakage_violations", 0}}
                 .dump()
          << '\n';
      return kOk;
    }

    if (*index_cmd) {
      const ToolRegistry registry = read_tool_corpus(fs::path(index_corpus));
      const retrieval::RetrievalIndex index = prompt::build_tool_index(registry, index_config);
      write_file(index_out, index.to_json().dump() + "\n");
      out << nlohmann::json{{"index", index_out}, {"n_docs", index.size()}, {"n_terms", index.vocabulary().size()}}
                 .dump()
          << '\n';
      return kOk;
    }

    if (*eval_cmd) {
      eval::EvalSettings settings = eval_flags.settings();
      settings.extra["subcommand"] = "eval";
      LoadedInputs in = load_inputs(eval_flags, settings);
      const auto planner = planner::make_planner(settings.planner, in.benchmark, in.registry);
      eval::EvalRun run = eval::run_evaluation(in.benchmark, in.registry, in.index ? &*in.index : nullptr,
                                               *planner, settings);
      const std::string report = run.report.to_json().dump(2) + "\n";
      std::string log_path = eval_flags.replay_log;
      if (log_path.empty() && settings.planner.backend == planner::Backend::Http) {
        log_path = (eval_out.empty() ? std::string("eval") : eval_out) + ".replay.jsonl";
      }
      if (!log_path.empty()) planner::write_replay_log(run.replay, log_path);
      if (eval_out.empty()) {
        out << report;
      } else {
        write_file(eval_out, report);
        out << nlohmann::json{{"report", eval_out}, {"summary", run.report.aggregate.display()}}.dump() << '\n';
      }
      return kOk;
    }

    if (*sweep_cmd) {
      eval::EvalSettings settings = sweep_flags.settings();
      settings.extra["subcommand"] = "sweep";
      LoadedInputs in = load_inputs(sweep_flags, settings);
      const eval::SweepAxis sweep_axis = eval::parse_sweep_axis(axis);
      const std::vector<std::size_t> axis_values = eval::parse_axis_values(values);
      const auto planner = planner::make_planner(settings.planner, in.benchmark, in.registry);
      const auto points = eval::sweep(in.benchmark, in.registry, in.index ? &*in.index : nullptr, *planner,
                                      sweep_axis, axis_values, settings);
      const fs::path dir(sweep_out_dir);
      fs::create_directories(dir);
      for (const auto& p : points) {
        const std::string stem = "report_" + std::string(eval::to_string(sweep_axis)) + "_" + std::to_string(p.value);
        write_file(dir / (stem + ".json"), p.run.report.to_json().dump(2) + "\n");
        if (settings.planner.backend == planner::Backend::Http || !sweep_flags.replay_log.empty()) {
          planner::write_replay_log(p.run.replay, dir / (stem + ".replay.jsonl"));
        }
      }
      const std::string csv = eval::sweep_csv(points);
      write_file(dir / "sweep.csv", csv);
      out << csv;
      return kOk;
    }

    if (*replay_cmd) {
      const forge::Benchmark benchmark = forge::read_benchmark(replay_bench);
      const auto log = planner::read_replay_log(replay_log);
      nlohmann::json config = {{"subcommand", "replay"},
                               {"log", replay_log},
                               {"benchmark", replay_bench},
                               {"log_digest", text::sha256_hex(nlohmann::json(log).dump())}};
      const eval::EvalReport report =
          eval::rescore_replay(benchmark, log, eval::parse_match_mode(replay_match), std::move(config));
      const std::string body = report.to_json().dump(2) + "\n";
      if (replay_out.empty()) {
        out << body;
      } else {
        write_file(replay_out, body);
        out << nlohmann::json{{"report", replay_out}, {"summary", report.aggregate.display()}}.dump() << '\n';
      }
      return kOk;
    }

    if (*dsl_cmd) {
      std::ifstream in(program_path, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      std::map<std::string, nlohmann::json> inputs;
      dsl::ParseOptions options;
      for (const std::string& flag : input_flags) {
        const std::size_t eq = flag.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error("cli", "ConfigError", "--input expects NAME=VALUE, got '" + flag + "'");
        }
        const std::string name = flag.substr(0, eq);
        const std::string raw = flag.substr(eq + 1);
        nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        inputs[name] = std::move(value);
        options.inputs.insert(name);
      }
      const dsl::Program program = dsl::parse_program(buf.str(), options);
      if (render_only) {
        out << dsl::render(program) << '\n';
        return kOk;
      }
      if (fixtures_path.empty()) throw Error("cli", "ConfigError", "--fixtures is required unless --render is given");
      const dsl::ModuleTable modules = dsl::ModuleTable::load(fixtures_path);
      const dsl::ExecutionResult result = dsl::execute(program, inputs, modules);
      out << nlohmann::json{{"program", dsl::render(program)},
                            {"modules", result.module_sequence()},
                            {"trace", result.trace_json()},
                            {"result", result.result ? *result.result : nlohmann::json()}}
                 .dump(2)
          << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    err << nlohmann::json{{"error", e.to_json()}}.dump() << '\n';
    return e.kind() == "ConfigError" || e.kind() == "InvalidConfig" ? kConfigError : kModuleError;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", {{"module", "cli"}, {"kind", "InternalError"}, {"message", e.what()}}}}.dump()
        << '\n';
    return kModuleError;
  }
  return kConfigError;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace docplan::cli
