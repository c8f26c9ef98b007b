#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "docplan/command_plan.hpp"
#include "docplan/corpusforge.hpp"
#include "docplan/llmclient.hpp"
#include "docplan/promptkit.hpp"
#include "docplan/registry.hpp"
#include "docplan/retriever.hpp"

namespace docplan::eval {

enum class MatchMode { Exact, PlaceholderWildcard };

MatchMode parse_match_mode(std::string_view s);
std::string_view to_string(MatchMode m);

/// Trims and collapses whitespace (continuations are joined upstream; a
/// stray trailing backslash-newline is folded here too). Case and flag
/// syntax are kept. Throws Error{EmptyLine}.
std::string normalize_command(std::string_view line, MatchMode mode = MatchMode::Exact);

/// An ALL-CAPS token of length >= 2 ([A-Z][A-Z0-9_]+), e.g. NAME or PROJ_ID.
bool is_placeholder(std::string_view token);

/// Compares normalized lines. In wildcard mode each standalone placeholder
/// token of `gold` matches any single token of `pred`.
bool lines_match(std::string_view pred, std::string_view gold, MatchMode mode);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<std::string, std::string>> matched;  // (pred, gold)
  MatchMode mode = MatchMode::Exact;
};

/// One-to-one matching: each predicted line, in order, takes the first unused
/// gold line it matches. In wildcard mode augmenting paths then grow this to a
/// maximum matching. Throws Error{EmptyGold}.
F1Result f1_score(const CommandPlan& pred, const CommandPlan& gold, MatchMode mode = MatchMode::Exact);

struct TaskResult {
  std::string task_id;
  std::size_t trial = 0;
  F1Result score;
  std::vector<std::string> extraction_warnings;
  std::vector<std::string> prompt_warnings;
  std::vector<std::string> retrieved_doc_ids;
  std::vector<std::size_t> demo_ids;
};

struct Aggregate {
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // population std over trial means
  double max_f1 = 0.0;  // max of trial means
  std::size_t n_tasks = 0;
  std::size_t n_trials = 0;
  std::vector<double> trial_means;

  /// "0.18 ± 0.06 (0.21)" for several trials, "0.45" for one.
  std::string display() const;
};

/// Means over tasks within each trial, then mean/std/max over trials.
/// Throws Error{EmptyResults} when there are no tasks.
Aggregate aggregate(const std::vector<TaskResult>& results);
Aggregate aggregate_trial_means(const std::vector<double>& trial_means, std::size_t n_tasks);

struct EvalReport {
  std::vector<TaskResult> per_task;
  Aggregate aggregate;
  nlohmann::json config;
  std::string config_digest;
  /// Only field allowed to differ between identical runs.
  std::string timestamp;

  nlohmann::json to_json() const;
};

/// Per-(task, trial) seed: first 8 bytes of sha256("<root>:<task_id>:<trial>").
std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view task_id, std::size_t trial);

struct EvalSettings {
  prompt::PromptCondition condition;  // demo_seed is replaced per (task, trial)
  std::size_t trials = 1;
  std::uint64_t root_seed = 0;
  MatchMode match_mode = MatchMode::Exact;
  planner::PlannerConfig planner;
  std::size_t workers = 4;
  prompt::PromptTemplate prompt_template = prompt::PromptTemplate::default_template();
  /// Extra configuration echoed into the report (paths, flags).
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json settings_json(const EvalSettings& settings, const forge::Benchmark& benchmark);

struct EvalRun {
  EvalReport report;
  std::vector<planner::ReplayEntry> replay;
};

/// Runs every (trial, task) pair. Results are ordered by (trial, task
/// position) whatever the scheduling. `index` may be null; one is built from
/// the registry when the condition uses docs.
EvalRun run_evaluation(const forge::Benchmark& benchmark, const ToolRegistry& registry,
                       const retrieval::RetrievalIndex* index, const planner::Planner& planner,
                       const EvalSettings& settings);

/// Re-scores logged completions against the benchmark's gold plans.
EvalReport rescore_replay(const forge::Benchmark& benchmark, const std::vector<planner::ReplayEntry>& log,
                          MatchMode mode, nlohmann::json config);

enum class SweepAxis { DocWords, Shots };

SweepAxis parse_sweep_axis(std::string_view s);
std::string_view to_string(SweepAxis a);

/// "100..800:100" (inclusive range with step) or "0,5,10,15".
std::vector<std::size_t> parse_axis_values(std::string_view spec);

struct SweepPoint {
  std::size_t value = 0;
  EvalRun run;
};

/// One full evaluation per axis value with everything else held fixed.
/// Values must be strictly increasing; doc_words values must be positive.
std::vector<SweepPoint> sweep(const forge::Benchmark& benchmark, const ToolRegistry& registry,
                              const retrieval::RetrievalIndex* index, const planner::Planner& planner,
                              SweepAxis axis, const std::vector<std::size_t>& values, const EvalSettings& base);

/// Header: axis_value,mean_f1,std_f1,max_f1,n_tasks,n_trials
std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace docplan::eval
