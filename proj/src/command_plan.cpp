#include "docplan/command_plan.hpp"

#include "docplan/text.hpp"

namespace docplan {

std::string CommandPlan::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

namespace {

bool ends_with_continuation(std::string_view line) {
  line = text::trim(line);
  if (line.empty() || line.back() != '\\') return false;
  return line.size() < 2 || line[line.size() - 2] != '\\';
}

}  // namespace

std::vector<std::string> logical_lines(std::string_view input) {
  std::vector<std::string> out;
  std::string pending;
  bool continuing = false;
  for (const std::string& physical : text::split_lines(input)) {
    std::string_view line = physical;
    const bool cont = ends_with_continuation(line);
    if (cont) {
      line = text::trim(line);
      line.remove_suffix(1);
    }
    if (continuing) pending.push_back(' ');
    pending.append(line);
    continuing = cont;
    if (!cont) {
      std::string collapsed = text::collapse_whitespace(pending);
      if (!collapsed.empty()) out.push_back(std::move(collapsed));
      pending.clear();
    }
  }
  if (continuing) {
    std::string collapsed = text::collapse_whitespace(pending);
    if (!collapsed.empty()) out.push_back(std::move(collapsed));
  }
  return out;
}

CommandPlan plan_from_lines(const std::vector<std::string>& entries) {
  CommandPlan plan;
  for (const std::string& entry : entries) {
    for (std::string& line : logical_lines(entry)) plan.lines.push_back(std::move(line));
  }
  plan.raw_completion = plan.to_text();
  return plan;
}

}  // namespace docplan
