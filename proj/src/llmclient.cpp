#include "docplan/llmclient.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "docplan/error.hpp"
#include "docplan/retriever.hpp"
#include "docplan/text.hpp"

namespace docplan::planner {

namespace {

Error planner_error(std::string kind, const std::string& message,
                    nlohmann::json details = nlohmann::json::object()) {
  return Error("llmclient", std::move(kind), message, std::move(details));
}

std::string completion_from_lines(const std::vector<std::string>& lines) {
  std::string out(prompt::kAnswerMarker);
  for (const std::string& line : lines) {
    out.push_back('\n');
    out += line;
  }
  return out;
}

bool starts_with_marker(std::string_view line) {
  return text::trim(line).substr(0, prompt::kAnswerMarker.size()) == prompt::kAnswerMarker;
}

std::string_view strip_list_prefix(std::string_view line) {
  while (true) {
    line = text::trim(line);
    if (line.size() >= 2 && (line[0] == '-' || line[0] == '*' || line[0] == '+') && text::is_space(line[1])) {
      line.remove_prefix(2);
      continue;
    }
    if (line.substr(0, 3) == "\xE2\x80\xA2") {  // U+2022 bullet
      line.remove_prefix(3);
      continue;
    }
    std::size_t digits = 0;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') ++digits;
    if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
        text::is_space(line[digits + 1])) {
      line.remove_prefix(digits + 2);
      continue;
    }
    return line;
  }
}

std::string getenv_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string{};
}

}  // namespace

Backend parse_backend(std::string_view s) {
  if (s == "http") return Backend::Http;
  if (s == "stub-oracle") return Backend::StubOracle;
  if (s == "stub-docgrep") return Backend::StubDocgrep;
  if (s == "stub-demoecho") return Backend::StubDemoEcho;
  throw planner_error("InvalidConfig", "unknown backend: " + std::string(s));
}

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Http: return "http";
    case Backend::StubOracle: return "stub-oracle";
    case Backend::StubDocgrep: return "stub-docgrep";
    case Backend::StubDemoEcho: return "stub-demoecho";
  }
  return "unknown";
}

void PlannerConfig::validate() const {
  if (!(temperature >= 0.0)) throw planner_error("InvalidConfig", "temperature must be >= 0");
  if (max_retries < 0) throw planner_error("InvalidConfig", "max_retries must be >= 0");
  if (max_output_tokens < 1) throw planner_error("InvalidConfig", "max_output_tokens must be >= 1");
  if (max_in_flight < 1) throw planner_error("InvalidConfig", "max_in_flight must be >= 1");
  if (request_timeout.count() <= 0) throw planner_error("InvalidConfig", "request_timeout must be positive");
}

void to_json(nlohmann::json& j, const PlannerConfig& c) {
  j = {{"backend", to_string(c.backend)},
       {"endpoint", c.endpoint},
       {"model", c.model},
       {"temperature", c.temperature},
       {"max_output_tokens", c.max_output_tokens},
       {"request_timeout_ms", c.request_timeout.count()},
       {"max_retries", c.max_retries},
       {"initial_backoff_ms", c.initial_backoff.count()},
       {"max_prompt_words", c.max_prompt_words},
       {"max_in_flight", c.max_in_flight}};
}

void from_json(const nlohmann::json& j, PlannerConfig& c) {
  c.backend = parse_backend(j.value("backend", std::string(to_string(c.backend))));
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
  c.request_timeout = std::chrono::milliseconds(j.value("request_timeout_ms", c.request_timeout.count()));
  c.max_retries = j.value("max_retries", c.max_retries);
  c.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", c.initial_backoff.count()));
  c.max_prompt_words = j.value("max_prompt_words", c.max_prompt_words);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
}

Extraction extract_plan(std::string_view completion) {
  const std::vector<std::string> physical = text::split_lines(completion);
  std::size_t start = 0;
  bool has_marker = false;
  for (std::size_t i = 0; i < physical.size(); ++i) {
    if (starts_with_marker(physical[i])) {
      start = i;
      has_marker = true;
    }
  }

  std::string kept;
  for (std::size_t i = start; i < physical.size(); ++i) {
    std::string_view line = physical[i];
    if (has_marker && i == start) {
      line = text::trim(line);
      while (starts_with_marker(line)) line = text::trim(line.substr(prompt::kAnswerMarker.size()));
    }
    if (text::trim(line).substr(0, 3) == "```") continue;
    line = strip_list_prefix(line);
    if (line.empty()) continue;
    kept.append(line);
    kept.push_back('\n');
  }

  Extraction out;
  out.plan.lines = logical_lines(kept);
  out.plan.raw_completion = std::string(completion);
  if (out.plan.lines.empty()) out.warnings.push_back("no commands could be extracted from the completion");
  return out;
}

std::string OraclePlanner::complete(const prompt::Prompt& prompt) const {
  const forge::BenchmarkTask* task = benchmark_.find_task(prompt.provenance.task_id);
  if (task == nullptr) {
    throw planner_error("UnknownTask", "oracle has no gold plan for task " + prompt.provenance.task_id,
                        {{"task_id", prompt.provenance.task_id}});
  }
  return completion_from_lines(task->gold_plan.lines);
}

std::string DocGrepPlanner::complete(const prompt::Prompt& prompt) const {
  const prompt::Section* docs = prompt.section(prompt::kDocumentation);
  if (docs == nullptr) return completion_from_lines({});
  std::vector<std::string> lines;
  for (const std::string& id : prompt.provenance.retrieved_doc_ids) {
    const ToolSpec* tool = registry_.find(id);
    if (tool == nullptr) continue;
    bool seen = false;
    for (std::size_t pos = docs->text.find(id); pos != std::string::npos; pos = docs->text.find(id, pos + 1)) {
      if (text::matches_at_boundary(docs->text, pos, id)) {
        seen = true;
        break;
      }
    }
    if (seen) lines.push_back(tool->signature.empty() ? tool->tool_id : tool->signature);
  }
  return completion_from_lines(lines);
}

std::string DemoEchoPlanner::complete(const prompt::Prompt& prompt) const {
  if (prompt.provenance.demo_ids.empty()) return {};
  const std::size_t first = prompt.provenance.demo_ids.front();
  if (first >= demo_pool_.size()) {
    throw planner_error("UnknownDemo", "demo id " + std::to_string(first) + " outside the pool");
  }
  return std::string(prompt::kAnswerMarker) + "\n" + demo_pool_[first].plan;
}

HttpPlanner::HttpPlanner(PlannerConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.validate();
  if (config_.endpoint.empty()) config_.endpoint = getenv_or_empty(kEndpointEnv);
  if (config_.model.empty()) config_.model = getenv_or_empty(kModelEnv);
  api_key_ = getenv_or_empty(kApiKeyEnv);
  if (config_.endpoint.empty()) {
    throw planner_error("BackendUnavailable", std::string("no endpoint configured; set ") + kEndpointEnv);
  }
  const std::size_t scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw planner_error("InvalidConfig", "endpoint must be an http(s) URL: " + config_.endpoint);
  }
  const std::size_t slash = config_.endpoint.find('/', scheme + 3);
  base_url_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds HttpPlanner::backoff(int attempt) const {
  constexpr std::chrono::milliseconds kCap{30'000};
  auto delay = config_.initial_backoff;
  for (int i = 0; i < attempt && delay < kCap; ++i) delay *= 2;
  return std::min(delay, kCap);
}

std::string HttpPlanner::complete(const prompt::Prompt& prompt) const {
  const std::size_t words = retrieval::word_count(prompt.rendered);
  if (words > config_.max_prompt_words) {
    throw planner_error("BudgetExceeded",
                        "prompt has " + std::to_string(words) + " words; backend limit is " +
                            std::to_string(config_.max_prompt_words),
                        {{"task_id", prompt.provenance.task_id}});
  }
  nlohmann::json body = {{"prompt", prompt.rendered},
                         {"temperature", config_.temperature},
                         {"max_tokens", config_.max_output_tokens}};
  if (!config_.model.empty()) body["model"] = config_.model;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_failure;
  bool last_was_timeout = false;
  for (int attempt = 0;; ++attempt) {
    httplib::Client client(base_url_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    bool retriable = false;
    if (auto res = client.Post(path_, headers, payload, "application/json")) {
      if (res->status == 200) {
        try {
          const auto j = nlohmann::json::parse(res->body);
          if (j.contains("completion")) return j.at("completion").get<std::string>();
          const auto& choice = j.at("choices").at(0);
          if (choice.contains("text")) return choice.at("text").get<std::string>();
          return choice.at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
          throw planner_error("BackendUnavailable", std::string("unreadable response body: ") + e.what());
        }
      }
      last_failure = "HTTP " + std::to_string(res->status);
      last_was_timeout = false;
      retriable = res->status == 429 || res->status >= 500;
    } else {
      last_was_timeout = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                         res.error() == httplib::Error::ConnectionTimeout;
      last_failure = httplib::to_string(res.error());
      retriable = true;
    }

    if (!retriable || attempt >= config_.max_retries) {
      const std::string kind = last_was_timeout ? "Timeout" : "BackendUnavailable";
      throw planner_error(kind,
                          "request failed after " + std::to_string(attempt + 1) + " attempt(s): " + last_failure,
                          {{"task_id", prompt.provenance.task_id}, {"attempts", attempt + 1}});
    }
    sleeper_(backoff(attempt));
  }
}

std::unique_ptr<Planner> make_planner(const PlannerConfig& config, const forge::Benchmark& benchmark,
                                      const ToolRegistry& registry) {
  config.validate();
  switch (config.backend) {
    case Backend::Http: return std::make_unique<HttpPlanner>(config);
    case Backend::StubOracle: return std::make_unique<OraclePlanner>(benchmark);
    case Backend::StubDocgrep: return std::make_unique<DocGrepPlanner>(registry);
    case Backend::StubDemoEcho: return std::make_unique<DemoEchoPlanner>(benchmark.demo_pool);
  }
  throw planner_error("InvalidConfig", "unsupported backend");
}

void to_json(nlohmann::json& j, const ReplayEntry& e) {
  j = {{"task_id", e.task_id},
       {"trial", e.trial},
       {"condition", e.condition},
       {"prompt_digest", e.prompt_digest},
       {"completion", e.completion}};
}

void from_json(const nlohmann::json& j, ReplayEntry& e) {
  j.at("task_id").get_to(e.task_id);
  e.trial = j.value("trial", std::size_t{0});
  if (j.contains("condition")) e.condition = j.at("condition").get<prompt::PromptCondition>();
  e.prompt_digest = j.value("prompt_digest", std::string{});
  j.at("completion").get_to(e.completion);
}

void write_replay_log(const std::vector<ReplayEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw planner_error("IoError", "cannot write replay log " + path.string());
  for (const ReplayEntry& e : entries) out << nlohmann::json(e).dump() << '\n';
}

std::vector<ReplayEntry> read_replay_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw planner_error("IoError", "cannot open replay log " + path.string());
  std::vector<ReplayEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      entries.push_back(nlohmann::json::parse(line).get<ReplayEntry>());
    } catch (const nlohmann::json::exception& e) {
      throw planner_error("InvalidReplayLog", "replay log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

}  // namespace docplan::planner
