#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace docplan::dsl {

struct VarRef {
  std::string name;
  bool operator==(const VarRef&) const = default;
};

/// Argument value: single-quoted string, decimal number, or variable.
using Value = std::variant<std::string, double, VarRef>;

struct Arg {
  std::string key;
  Value value;
  bool operator==(const Arg&) const = default;
};

struct Step {
  std::string target;
  std::string module;
  std::vector<Arg> args;
  std::size_t line = 0;  // source line, 1-based; ignored by ==

  bool operator==(const Step& o) const { return target == o.target && module == o.module && args == o.args; }
};

/// A tool-composition program: `VAR=MODULE(key=value, ...)` steps, run in
/// order. Every variable is assigned exactly once.
struct Program {
  std::vector<Step> steps;
  bool operator==(const Program&) const = default;
};

struct ParseOptions {
  /// Variables bound by the caller before the first step.
  std::set<std::string> inputs{"IMAGE", "VIDEO"};
};

/// Throws Error{SyntaxError} (details: line, col, expected),
/// Error{UndefinedVariable} or Error{DuplicateTarget} (details: step, line, name).
Program parse_program(std::string_view source, const ParseOptions& options = {});

/// Canonical source: one step per line, no spaces, shortest round-trip
/// numerals, no trailing newline.
std::string render(const Program& program);
std::string render_value(const Value& value);

std::vector<std::string> module_sequence(const Program& program);

/// Same module-name sequence, variable names ignored.
bool pipeline_equivalent(const Program& a, const Program& b);

/// Recursively turns every JSON number into a double so that 1 and 1.0
/// compare equal; top-level strings are trimmed.
nlohmann::json canonicalize_args(const nlohmann::json& args);

/// Table-driven stand-in for a model-backed module.
class MockModule {
 public:
  MockModule() = default;
  /// required_keys are the argument keys shared by every fixture entry.
  MockModule(std::string name, std::vector<std::pair<nlohmann::json, nlohmann::json>> fixtures);

  const std::string& name() const noexcept { return name_; }
  const std::set<std::string>& required_keys() const noexcept { return required_keys_; }
  std::size_t fixture_count() const noexcept { return table_.size(); }

  /// Output for canonicalized args, or nullptr.
  const nlohmann::json* lookup(const nlohmann::json& canonical_args) const;

 private:
  std::string name_;
  std::set<std::string> required_keys_;
  std::map<std::string, nlohmann::json> table_;  // canonical args dump -> output
};

class ModuleTable {
 public:
  void add(MockModule module);
  const MockModule* find(std::string_view name) const;
  std::vector<std::string> names() const;

  /// Fixture file: {module_name: [{args: {...}, output: ...}]}.
  static ModuleTable from_json(const nlohmann::json& j);
  static ModuleTable load(const std::filesystem::path& path);

 private:
  std::map<std::string, MockModule, std::less<>> modules_;
};

struct TraceEntry {
  std::size_t step = 0;  // 1-based
  std::string target;
  std::string module;
  nlohmann::json args;
  std::string output_digest;
};

struct ExecutionResult {
  std::vector<std::pair<std::string, nlohmann::json>> bindings;  // inputs first, then step order
  std::optional<nlohmann::json> result;
  std::vector<TraceEntry> trace;

  const nlohmann::json* binding(std::string_view name) const;
  std::vector<std::string> module_sequence() const;
  nlohmann::json trace_json() const;
};

/// Throws Error{MissingInput}, Error{UnknownModule}, Error{MissingArgKey} or
/// Error{FixtureMiss}.
ExecutionResult execute(const Program& program, const std::map<std::string, nlohmann::json>& inputs,
                        const ModuleTable& modules);

}  // namespace docplan::dsl
