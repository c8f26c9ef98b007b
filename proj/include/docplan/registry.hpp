#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace docplan {

/// An <instruction, plan> pair shown to the planner as a demonstration.
/// `plan` is either newline-separated command lines or program source.
struct DemoExample {
  std::string instruction;
  std::string plan;

  bool operator==(const DemoExample&) const = default;
};

struct ToolSpec {
  std::string tool_id;
  std::string name;
  std::string signature;
  std::string doc_text;
  std::vector<DemoExample> demo_pool;

  bool operator==(const ToolSpec&) const = default;
};

enum class DocStyle { SignatureFirst, ProseFirst };

DocStyle parse_doc_style(std::string_view s);
std::string_view to_string(DocStyle style);

/// Renders a tool's documentation. Depends only on (spec, style); demos never
/// appear in the output.
std::string render_doc(const ToolSpec& spec, DocStyle style);

void to_json(nlohmann::json& j, const DemoExample& d);
void from_json(const nlohmann::json& j, DemoExample& d);
void to_json(nlohmann::json& j, const ToolSpec& t);
void from_json(const nlohmann::json& j, ToolSpec& t);

/// Insertion-ordered store of tool specs plus named task-level demo pools.
///
/// Built once, then treated as immutable; const access is safe from any
/// number of threads.
class ToolRegistry {
 public:
  /// Throws Error{DuplicateToolId} if the id is taken.
  const std::string& register_tool(ToolSpec spec);

  /// Throws Error{UnknownToolId}.
  const ToolSpec& lookup(std::string_view tool_id) const;
  const ToolSpec* find(std::string_view tool_id) const;
  bool contains(std::string_view tool_id) const { return find(tool_id) != nullptr; }

  std::string render_doc(std::string_view tool_id, DocStyle style) const;

  const std::vector<ToolSpec>& tools() const noexcept { return tools_; }
  std::size_t size() const noexcept { return tools_.size(); }
  bool empty() const noexcept { return tools_.empty(); }

  /// Task-level demo pools live beside the per-tool pools and are keyed
  /// separately. Re-attaching a key replaces the pool.
  void attach_demo_pool(std::string key, std::vector<DemoExample> demos);
  const std::vector<DemoExample>& demo_pool(std::string_view key) const;
  std::vector<std::string> demo_pool_keys() const;

 private:
  std::vector<ToolSpec> tools_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::pair<std::string, std::vector<DemoExample>>> pools_;
};

/// Tool corpus file: one JSON object per line,
/// {tool_id, name, signature, doc_text, demos: [{instruction, plan}]}.
ToolRegistry read_tool_corpus(std::istream& in);
ToolRegistry read_tool_corpus(const std::filesystem::path& path);
void write_tool_corpus(const ToolRegistry& registry, std::ostream& out);
void write_tool_corpus(const ToolRegistry& registry, const std::filesystem::path& path);

}  // namespace docplan
