#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace docplan {

/// Ordered command lines produced by a planner or taken from a gold answer.
struct CommandPlan {
  std::vector<std::string> lines;
  std::string raw_completion;

  bool empty() const noexcept { return lines.empty(); }
  /// One command per line, no trailing newline.
  std::string to_text() const;
};

/// Splits text into logical command lines: a physical line ending in a single
/// backslash continues onto the next one, whitespace runs collapse to one
/// space, blank lines disappear.
std::vector<std::string> logical_lines(std::string_view text);

/// Builds a plan from already-separated entries, each of which may itself
/// carry backslash continuations.
CommandPlan plan_from_lines(const std::vector<std::string>& entries);

}  // namespace docplan
