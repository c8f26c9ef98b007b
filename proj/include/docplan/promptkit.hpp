#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "docplan/corpusforge.hpp"
#include "docplan/registry.hpp"
#include "docplan/retriever.hpp"

namespace docplan::prompt {

/// Marker after which the planner is asked to list its commands.
inline constexpr std::string_view kAnswerMarker = "Commands:";
inline constexpr std::string_view kTemplateVersion = "docplan-cli-prompt/1";

struct PromptCondition {
  bool use_docs = false;
  std::size_t shots = 0;
  std::uint64_t demo_seed = 0;
  retrieval::RetrievalConfig retrieval;

  bool operator==(const PromptCondition&) const = default;
};

void to_json(nlohmann::json& j, const PromptCondition& c);
void from_json(const nlohmann::json& j, PromptCondition& c);

// Section labels, in rendering order.
inline constexpr std::string_view kSystem = "system";
inline constexpr std::string_view kDocumentation = "documentation";
inline constexpr std::string_view kExamples = "examples";
inline constexpr std::string_view kQuestion = "question";
inline constexpr std::string_view kAnswerFormat = "answer_format";

struct Section {
  std::string label;
  std::string text;
  bool operator==(const Section&) const = default;
};

struct Provenance {
  std::string task_id;
  PromptCondition condition;
  std::vector<std::string> retrieved_doc_ids;  // in rank order, after budget trimming
  std::vector<std::size_t> demo_ids;           // indices into the demo pool, sampled order
  std::vector<std::string> warnings;
};

struct Prompt {
  std::vector<Section> sections;
  std::string rendered;
  Provenance provenance;

  const Section* section(std::string_view label) const;
};

/// Layout with named placeholders. `{{name}}` is replaced by a section's
/// text; a line holding only `{{#name}}` ... `{{/name}}` brackets lines that
/// are emitted only when that section exists.
class PromptTemplate {
 public:
  static PromptTemplate default_template();
  /// Throws Error{InvalidTemplate}.
  static PromptTemplate from_text(std::string text);
  static PromptTemplate load(const std::filesystem::path& path);

  std::string render(const std::vector<Section>& sections) const;

  const std::string& text() const noexcept { return text_; }
  std::string digest() const;

 private:
  std::string text_;
};

/// Uniform sample of k distinct indices from [0, n) in sampled order.
/// Deterministic for fixed (n, k, seed) on every platform.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

/// Throws Error{NotEnoughDemos} when shots > pool.size().
std::vector<DemoExample> select_demos(const std::vector<DemoExample>& pool, std::size_t shots,
                                      std::uint64_t seed);

/// Index over each tool's signature-first rendering, keyed by tool_id.
retrieval::RetrievalIndex build_tool_index(const ToolRegistry& registry,
                                           const retrieval::RetrievalConfig& config = {});

/// `index` may be null when the condition does not use docs.
Prompt assemble_prompt(const forge::BenchmarkTask& task, const PromptCondition& condition,
                       const ToolRegistry& registry, const retrieval::RetrievalIndex* index,
                       const std::vector<DemoExample>& demo_pool,
                       const PromptTemplate& tmpl = PromptTemplate::default_template());

}  // namespace docplan::prompt
