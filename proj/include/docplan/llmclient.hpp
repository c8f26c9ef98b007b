#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "docplan/command_plan.hpp"
#include "docplan/corpusforge.hpp"
#include "docplan/promptkit.hpp"
#include "docplan/registry.hpp"

namespace docplan::planner {

enum class Backend { Http, StubOracle, StubDocgrep, StubDemoEcho };

Backend parse_backend(std::string_view s);
std::string_view to_string(Backend b);

inline constexpr const char* kEndpointEnv = "DOCPLAN_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "DOCPLAN_API_KEY";
inline constexpr const char* kModelEnv = "DOCPLAN_MODEL";

struct PlannerConfig {
  Backend backend = Backend::StubOracle;
  /// http only; empty means read kEndpointEnv. Credentials never live here.
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int max_output_tokens = 512;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::size_t max_prompt_words = 12'000;
  std::size_t max_in_flight = 4;

  /// Throws Error{InvalidConfig}.
  void validate() const;
};

void to_json(nlohmann::json& j, const PlannerConfig& c);
void from_json(const nlohmann::json& j, PlannerConfig& c);

struct Extraction {
  CommandPlan plan;
  std::vector<std::string> warnings;
};

/// Takes the text after the last line that starts with the answer marker
/// (the whole text if there is none), drops code fences, blank lines and
/// list bullets or numbering, and joins backslash continuations.
Extraction extract_plan(std::string_view completion);

/// Maps a prompt to completion text. Implementations must be safe to call
/// concurrently.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string complete(const prompt::Prompt& prompt) const = 0;
  virtual Backend backend() const = 0;
};

/// Returns the gold plan of the task named in the prompt's provenance.
class OraclePlanner final : public Planner {
 public:
  explicit OraclePlanner(const forge::Benchmark& benchmark) : benchmark_(benchmark) {}
  std::string complete(const prompt::Prompt& prompt) const override;
  Backend backend() const override { return Backend::StubOracle; }

 private:
  const forge::Benchmark& benchmark_;
};

/// For each retrieved document, in rank order, whose tool id appears in the
/// prompt's documentation section, emits that tool's usage line (signature,
/// or the tool id when there is none).
class DocGrepPlanner final : public Planner {
 public:
  explicit DocGrepPlanner(const ToolRegistry& registry) : registry_(registry) {}
  std::string complete(const prompt::Prompt& prompt) const override;
  Backend backend() const override { return Backend::StubDocgrep; }

 private:
  const ToolRegistry& registry_;
};

/// Echoes the plan of the first demo in the prompt; empty without demos.
class DemoEchoPlanner final : public Planner {
 public:
  explicit DemoEchoPlanner(const std::vector<DemoExample>& demo_pool) : demo_pool_(demo_pool) {}
  std::string complete(const prompt::Prompt& prompt) const override;
  Backend backend() const override { return Backend::StubDemoEcho; }

 private:
  const std::vector<DemoExample>& demo_pool_;
};

/// POSTs {prompt, temperature, max_tokens} as JSON and reads the completion
/// from "completion", "choices[0].text" or "choices[0].message.content".
/// Connection failures, timeouts, 429 and 5xx are retried with exponential
/// backoff up to max_retries times.
class HttpPlanner final : public Planner {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  /// Resolves the endpoint and API key from the environment when unset.
  explicit HttpPlanner(PlannerConfig config, Sleeper sleeper = {});
  std::string complete(const prompt::Prompt& prompt) const override;
  Backend backend() const override { return Backend::Http; }

  /// Delay before retry number `attempt` (0-based).
  std::chrono::milliseconds backoff(int attempt) const;

 private:
  PlannerConfig config_;
  std::string api_key_;
  std::string base_url_;
  std::string path_;
  Sleeper sleeper_;
};

std::unique_ptr<Planner> make_planner(const PlannerConfig& config, const forge::Benchmark& benchmark,
                                      const ToolRegistry& registry);

/// One line of the replay log.
struct ReplayEntry {
  std::string task_id;
  std::size_t trial = 0;
  prompt::PromptCondition condition;
  std::string prompt_digest;
  std::string completion;
};

void to_json(nlohmann::json& j, const ReplayEntry& e);
void from_json(const nlohmann::json& j, ReplayEntry& e);

void write_replay_log(const std::vector<ReplayEntry>& entries, const std::filesystem::path& path);
std::vector<ReplayEntry> read_replay_log(const std::filesystem::path& path);

}  // namespace docplan::planner
