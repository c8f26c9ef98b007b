#include "docplan/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "docplan/error.hpp"
#include "docplan/text.hpp"

namespace docplan::eval {

namespace {

Error eval_error(std::string kind, const std::string& message,
                 nlohmann::json details = nlohmann::json::object()) {
  return Error("evaluator", std::move(kind), message, std::move(details));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json task_result_json(const TaskResult& r) {
  nlohmann::json matched = nlohmann::json::array();
  for (const auto& [p, g] : r.score.matched) matched.push_back({p, g});
  return {{"task_id", r.task_id},
          {"trial", r.trial},
          {"precision", r.score.precision},
          {"recall", r.score.recall},
          {"f1", r.score.f1},
          {"matched", std::move(matched)},
          {"extraction_warnings", r.extraction_warnings},
          {"prompt_warnings", r.prompt_warnings},
          {"retrieved_doc_ids", r.retrieved_doc_ids},
          {"demo_ids", r.demo_ids}};
}

}  // namespace

MatchMode parse_match_mode(std::string_view s) {
  if (s == "exact") return MatchMode::Exact;
  if (s == "placeholder-wildcard") return MatchMode::PlaceholderWildcard;
  throw eval_error("InvalidConfig", "unknown match mode: " + std::string(s));
}

std::string_view to_string(MatchMode m) { return m == MatchMode::Exact ? "exact" : "placeholder-wildcard"; }

std::string normalize_command(std::string_view line, MatchMode /*mode*/) {
  std::vector<std::string> lines = logical_lines(line);
  std::string joined;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) joined.push_back(' ');
    joined += lines[i];
  }
  if (joined.empty()) throw eval_error("EmptyLine", "cannot normalize an empty command line");
  return joined;
}

bool is_placeholder(std::string_view token) {
  if (token.size() < 2 || !(token[0] >= 'A' && token[0] <= 'Z')) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool lines_match(std::string_view pred, std::string_view gold, MatchMode mode) {
  if (mode == MatchMode::Exact) return pred == gold;
  const auto p = text::split_words(pred);
  const auto g = text::split_words(gold);
  if (p.size() != g.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != g[i] && !is_placeholder(g[i])) return false;
  }
  return true;
}

F1Result f1_score(const CommandPlan& pred, const CommandPlan& gold, MatchMode mode) {
  if (gold.lines.empty()) throw eval_error("EmptyGold", "gold plan has no command lines");
  F1Result result;
  result.mode = mode;
  if (pred.lines.empty()) return result;

  std::vector<std::string> gold_norm;
  for (const std::string& g : gold.lines) gold_norm.push_back(normalize_command(g, mode));
  std::vector<std::string> pred_norm;
  for (const std::string& p : pred.lines) pred_norm.push_back(normalize_command(p, mode));

  std::vector<std::vector<std::size_t>> edges(pred_norm.size());
  for (std::size_t p = 0; p < pred_norm.size(); ++p) {
    for (std::size_t g = 0; g < gold_norm.size(); ++g) {
      if (lines_match(pred_norm[p], gold_norm[g], mode)) edges[p].push_back(g);
    }
  }

  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(gold_norm.size(), kFree);  // gold -> pred
  std::vector<std::size_t> partner(pred_norm.size(), kFree);
  for (std::size_t p = 0; p < pred_norm.size(); ++p) {
    for (std::size_t g : edges[p]) {
      if (owner[g] == kFree) {
        owner[g] = p;
        partner[p] = g;
        break;
      }
    }
  }
  // Wildcards make the relation non-transitive, so the greedy pass can leave
  // augmenting paths behind.
  if (mode == MatchMode::PlaceholderWildcard) {
    std::vector<char> seen;
    std::function<bool(std::size_t)> augment = [&](std::size_t p) {
      for (std::size_t g : edges[p]) {
        if (seen[g]) continue;
        seen[g] = 1;
        if (owner[g] == kFree || augment(owner[g])) {
          owner[g] = p;
          partner[p] = g;
          return true;
        }
      }
      return false;
    };
    for (std::size_t p = 0; p < pred_norm.size(); ++p) {
      if (partner[p] != kFree) continue;
      seen.assign(gold_norm.size(), 0);
      augment(p);
    }
  }
  for (std::size_t p = 0; p < pred_norm.size(); ++p) {
    if (partner[p] != kFree) result.matched.emplace_back(pred_norm[p], gold_norm[partner[p]]);
  }
  const double matches = static_cast<double>(result.matched.size());
  result.precision = matches / static_cast<double>(pred.lines.size());
  result.recall = matches / static_cast<double>(gold.lines.size());
  const double denom = result.precision + result.recall;
  result.f1 = denom > 0.0 ? 2.0 * result.precision * result.recall / denom : 0.0;
  return result;
}

std::string Aggregate::display() const {
  if (n_trials <= 1) return text::fixed(mean_f1, 2);
  return text::fixed(mean_f1, 2) + " \xC2\xB1 " + text::fixed(std_f1, 2) + " (" + text::fixed(max_f1, 2) + ")";
}

Aggregate aggregate_trial_means(const std::vector<double>& trial_means, std::size_t n_tasks) {
  if (trial_means.empty() || n_tasks == 0) throw eval_error("EmptyResults", "nothing to aggregate");
  Aggregate a;
  a.n_tasks = n_tasks;
  a.n_trials = trial_means.size();
  a.trial_means = trial_means;
  double sum = 0.0;
  for (double m : trial_means) sum += m;
  a.mean_f1 = sum / static_cast<double>(trial_means.size());
  if (trial_means.size() == 1) {
    a.std_f1 = 0.0;
    a.max_f1 = a.mean_f1;
    return a;
  }
  double sq = 0.0;
  for (double m : trial_means) sq += (m - a.mean_f1) * (m - a.mean_f1);
  a.std_f1 = std::sqrt(sq / static_cast<double>(trial_means.size()));
  a.max_f1 = *std::max_element(trial_means.begin(), trial_means.end());
  return a;
}

Aggregate aggregate(const std::vector<TaskResult>& results) {
  if (results.empty()) throw eval_error("EmptyResults", "aggregate needs at least one task");
  // Sum in task_id order so the mean does not depend on result order.
  std::map<std::size_t, std::map<std::string, double>> by_trial;
  for (const TaskResult& r : results) by_trial[r.trial][r.task_id] = r.score.f1;
  std::vector<double> means;
  std::size_t n_tasks = 0;
  for (const auto& [trial, tasks] : by_trial) {
    double sum = 0.0;
    for (const auto& [_, f1] : tasks) sum += f1;
    means.push_back(sum / static_cast<double>(tasks.size()));
    n_tasks = std::max(n_tasks, tasks.size());
  }
  return aggregate_trial_means(means, n_tasks);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json tasks = nlohmann::json::array();
  for (const TaskResult& r : per_task) tasks.push_back(task_result_json(r));
  return {{"per_task", std::move(tasks)},
          {"aggregate",
           {{"mean_f1", aggregate.mean_f1},
            {"std_f1", aggregate.std_f1},
            {"max_f1", aggregate.max_f1},
            {"n_tasks", aggregate.n_tasks},
            {"n_trials", aggregate.n_trials},
            {"trial_means", aggregate.trial_means},
            {"display", aggregate.display()}}},
          {"config", config},
          {"config_digest", config_digest},
          {"metadata", {{"timestamp", timestamp}}}};
}

std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view task_id, std::size_t trial) {
  const std::string digest =
      text::sha256_hex(std::to_string(root_seed) + ":" + std::string(task_id) + ":" + std::to_string(trial));
  std::uint64_t seed = 0;
  std::from_chars(digest.data(), digest.data() + 16, seed, 16);
  return seed;
}

nlohmann::json settings_json(const EvalSettings& s, const forge::Benchmark& benchmark) {
  nlohmann::json condition = {{"use_docs", s.condition.use_docs},
                              {"shots", s.condition.shots},
                              {"retrieval", s.condition.retrieval}};
  return {{"condition", std::move(condition)},
          {"trials", s.trials},
          {"root_seed", s.root_seed},
          {"seed_rule", "sha256(root_seed:task_id:trial)[0:16 hex]"},
          {"match_mode", to_string(s.match_mode)},
          {"template", {{"version", prompt::kTemplateVersion}, {"digest", s.prompt_template.digest()}}},
          {"planner", s.planner},
          {"workers", s.workers},
          {"benchmark",
           {{"n_tasks", benchmark.tasks.size()},
            {"demo_pool_size", benchmark.demo_pool.size()},
            {"rename_map_digest", benchmark.metadata.rename_map_digest},
            {"digest", text::sha256_hex(forge::to_json(benchmark).dump())}}},
          {"extra", s.extra}};
}

EvalRun run_evaluation(const forge::Benchmark& benchmark, const ToolRegistry& registry,
                       const retrieval::RetrievalIndex* index, const planner::Planner& planner,
                       const EvalSettings& settings) {
  if (benchmark.tasks.empty()) throw eval_error("EmptyResults", "benchmark has no tasks");
  if (settings.trials < 1) throw eval_error("InvalidConfig", "trials must be >= 1");
  settings.condition.retrieval.validate();
  if (settings.condition.shots > benchmark.demo_pool.size()) {
    throw Error("promptkit", "NotEnoughDemos",
                "requested " + std::to_string(settings.condition.shots) + " demos; pool has " +
                    std::to_string(benchmark.demo_pool.size()));
  }

  std::optional<retrieval::RetrievalIndex> owned;
  if (settings.condition.use_docs && index == nullptr) {
    owned = prompt::build_tool_index(registry, settings.condition.retrieval);
    index = &*owned;
  }

  const std::size_t n_tasks = benchmark.tasks.size();
  const std::size_t n_jobs = n_tasks * settings.trials;
  std::vector<TaskResult> results(n_jobs);
  std::vector<planner::ReplayEntry> replay(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);

  auto run_job = [&](std::size_t job) {
    const std::size_t trial = job / n_tasks;
    const forge::BenchmarkTask& task = benchmark.tasks[job % n_tasks];
    try {
      prompt::PromptCondition condition = settings.condition;
      condition.demo_seed = derive_seed(settings.root_seed, task.task_id, trial);
      const prompt::Prompt p =
          prompt::assemble_prompt(task, condition, registry, index, benchmark.demo_pool, settings.prompt_template);
      const std::string completion = planner.complete(p);
      planner::Extraction extraction = planner::extract_plan(completion);

      TaskResult& r = results[job];
      r.task_id = task.task_id;
      r.trial = trial;
      r.score = f1_score(extraction.plan, task.gold_plan, settings.match_mode);
      r.extraction_warnings = std::move(extraction.warnings);
      r.prompt_warnings = p.provenance.warnings;
      r.retrieved_doc_ids = p.provenance.retrieved_doc_ids;
      r.demo_ids = p.provenance.demo_ids;
      replay[job] = {task.task_id, trial, condition, text::sha256_hex(p.rendered), completion};
    } catch (const Error& e) {
      nlohmann::json details = e.details();
      details["task_id"] = task.task_id;
      details["trial"] = trial;
      errors[job] = std::make_exception_ptr(
          Error(e.module(), e.kind(), std::string(e.what()) + " [task " + task.task_id + "]", details));
    } catch (...) {
      errors[job] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(settings.workers, 1, n_jobs);
  if (workers == 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < n_jobs; j = next++) run_job(j);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EvalRun run;
  run.report.per_task = std::move(results);
  run.report.aggregate = aggregate(run.report.per_task);
  run.report.config = settings_json(settings, benchmark);
  run.report.config_digest = text::sha256_hex(run.report.config.dump());
  run.report.timestamp = utc_timestamp();
  run.replay = std::move(replay);
  return run;
}

EvalReport rescore_replay(const forge::Benchmark& benchmark, const std::vector<planner::ReplayEntry>& log,
                          MatchMode mode, nlohmann::json config) {
  if (log.empty()) throw eval_error("EmptyResults", "replay log is empty");
  EvalReport report;
  for (const planner::ReplayEntry& entry : log) {
    const forge::BenchmarkTask* task = benchmark.find_task(entry.task_id);
    if (task == nullptr) {
      throw eval_error("UnknownTask", "replay log references unknown task " + entry.task_id,
                       {{"task_id", entry.task_id}});
    }
    planner::Extraction extraction = planner::extract_plan(entry.completion);
    TaskResult r;
    r.task_id = entry.task_id;
    r.trial = entry.trial;
    r.score = f1_score(extraction.plan, task->gold_plan, mode);
    r.extraction_warnings = std::move(extraction.warnings);
    report.per_task.push_back(std::move(r));
  }
  report.aggregate = aggregate(report.per_task);
  config["match_mode"] = to_string(mode);
  report.config = std::move(config);
  report.config_digest = text::sha256_hex(report.config.dump());
  report.timestamp = utc_timestamp();
  return report;
}

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "doc_words") return SweepAxis::DocWords;
  if (s == "shots") return SweepAxis::Shots;
  throw eval_error("InvalidConfig", "unknown sweep axis: " + std::string(s));
}

std::string_view to_string(SweepAxis a) { return a == SweepAxis::DocWords ? "doc_words" : "shots"; }

std::vector<std::size_t> parse_axis_values(std::string_view spec) {
  auto number = [&](std::string_view s) {
    s = text::trim(s);
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw eval_error("InvalidConfig", "bad axis value '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<std::size_t> values;
  if (const std::size_t dots = spec.find(".."); dots != std::string_view::npos) {
    const std::size_t colon = spec.find(':', dots);
    const std::size_t lo = number(spec.substr(0, dots));
    const std::size_t hi = number(spec.substr(dots + 2, colon == std::string_view::npos ? spec.npos : colon - dots - 2));
    const std::size_t step = colon == std::string_view::npos ? 1 : number(spec.substr(colon + 1));
    if (step == 0 || hi < lo) throw eval_error("InvalidConfig", "bad axis range '" + std::string(spec) + "'");
    for (std::size_t v = lo; v <= hi; v += step) values.push_back(v);
    return values;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    if (comma == std::string_view::npos) comma = spec.size();
    values.push_back(number(spec.substr(start, comma - start)));
    start = comma + 1;
  }
  return values;
}

std::vector<SweepPoint> sweep(const forge::Benchmark& benchmark, const ToolRegistry& registry,
                              const retrieval::RetrievalIndex* index, const planner::Planner& planner,
                              SweepAxis axis, const std::vector<std::size_t>& values, const EvalSettings& base) {
  if (values.empty()) throw eval_error("InvalidConfig", "sweep needs at least one axis value");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (axis == SweepAxis::DocWords && values[i] == 0) {
      throw eval_error("InvalidConfig", "doc_words values must be positive");
    }
    if (i > 0 && values[i] <= values[i - 1]) {
      throw eval_error("InvalidConfig", "sweep values must be strictly increasing");
    }
  }

  std::optional<retrieval::RetrievalIndex> owned;
  if (index == nullptr && base.condition.use_docs) {
    owned = prompt::build_tool_index(registry, base.condition.retrieval);
    index = &*owned;
  }

  std::vector<SweepPoint> points;
  for (std::size_t value : values) {
    EvalSettings settings = base;
    if (axis == SweepAxis::DocWords) {
      settings.condition.retrieval.doc_word_limit = value;
    } else {
      settings.condition.shots = value;
    }
    settings.extra["sweep"] = {{"axis", to_string(axis)}, {"value", value}};
    points.push_back({value, run_evaluation(benchmark, registry, index, planner, settings)});
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "axis_value,mean_f1,std_f1,max_f1,n_tasks,n_trials\n";
  for (const SweepPoint& p : points) {
    const Aggregate& a = p.run.report.aggregate;
    out += std::to_string(p.value) + "," + text::fixed(a.mean_f1, 6) + "," + text::fixed(a.std_f1, 6) + "," +
           text::fixed(a.max_f1, 6) + "," + std::to_string(a.n_tasks) + "," + std::to_string(a.n_trials) + "\n";
  }
  return out;
}

}  // namespace docplan::eval
