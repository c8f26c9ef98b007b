#include "docplan/registry.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "docplan/error.hpp"
#include "docplan/text.hpp"

namespace docplan {

namespace {

Error registry_error(std::string kind, const std::string& message) {
  return Error("registry", std::move(kind), message);
}

}  // namespace

DocStyle parse_doc_style(std::string_view s) {
  if (s == "signature-first") return DocStyle::SignatureFirst;
  if (s == "prose-first") return DocStyle::ProseFirst;
  throw registry_error("InvalidDocStyle", "unknown doc style: " + std::string(s));
}

std::string_view to_string(DocStyle style) {
  return style == DocStyle::SignatureFirst ? "signature-first" : "prose-first";
}

std::string render_doc(const ToolSpec& spec, DocStyle style) {
  const std::string& head = spec.signature.empty() ? spec.name : spec.signature;
  std::string out;
  if (style == DocStyle::SignatureFirst) {
    out = head;
    out += '\n';
    out += spec.doc_text;
  } else {
    out = spec.doc_text;
    out += "\nUsage: ";
    out += head;
  }
  return out;
}

void to_json(nlohmann::json& j, const DemoExample& d) {
  j = {{"instruction", d.instruction}, {"plan", d.plan}};
}

void from_json(const nlohmann::json& j, DemoExample& d) {
  j.at("instruction").get_to(d.instruction);
  j.at("plan").get_to(d.plan);
}

void to_json(nlohmann::json& j, const ToolSpec& t) {
  j = nlohmann::json::object();
  j["tool_id"] = t.tool_id;
  j["name"] = t.name;
  j["signature"] = t.signature;
  j["doc_text"] = t.doc_text;
  j["demos"] = t.demo_pool;
}

void from_json(const nlohmann::json& j, ToolSpec& t) {
  j.at("tool_id").get_to(t.tool_id);
  t.name = j.value("name", t.tool_id);
  t.signature = j.value("signature", std::string{});
  t.doc_text = j.value("doc_text", std::string{});
  t.demo_pool = j.value("demos", std::vector<DemoExample>{});
}

const std::string& ToolRegistry::register_tool(ToolSpec spec) {
  if (spec.tool_id.empty()) throw registry_error("InvalidToolSpec", "tool_id must be non-empty");
  if (by_id_.contains(spec.tool_id)) {
    throw registry_error("DuplicateToolId", "tool already registered: " + spec.tool_id);
  }
  by_id_.emplace(spec.tool_id, tools_.size());
  tools_.push_back(std::move(spec));
  return tools_.back().tool_id;
}

const ToolSpec* ToolRegistry::find(std::string_view tool_id) const {
  auto it = by_id_.find(std::string(tool_id));
  return it == by_id_.end() ? nullptr : &tools_[it->second];
}

const ToolSpec& ToolRegistry::lookup(std::string_view tool_id) const {
  if (const ToolSpec* spec = find(tool_id)) return *spec;
  throw registry_error("UnknownToolId", "unknown tool: " + std::string(tool_id));
}

std::string ToolRegistry::render_doc(std::string_view tool_id, DocStyle style) const {
  return docplan::render_doc(lookup(tool_id), style);
}

void ToolRegistry::attach_demo_pool(std::string key, std::vector<DemoExample> demos) {
  for (auto& [k, pool] : pools_) {
    if (k == key) {
      pool = std::move(demos);
      return;
    }
  }
  pools_.emplace_back(std::move(key), std::move(demos));
}

const std::vector<DemoExample>& ToolRegistry::demo_pool(std::string_view key) const {
  for (const auto& [k, pool] : pools_) {
    if (k == key) return pool;
  }
  throw registry_error("UnknownDemoPool", "no demo pool named " + std::string(key));
}

std::vector<std::string> ToolRegistry::demo_pool_keys() const {
  std::vector<std::string> keys;
  for (const auto& [k, _] : pools_) keys.push_back(k);
  return keys;
}

ToolRegistry read_tool_corpus(std::istream& in) {
  ToolRegistry registry;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ToolSpec spec;
    try {
      spec = nlohmann::json::parse(line).get<ToolSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("registry", "InvalidCorpus",
                  "tool corpus line " + std::to_string(line_no) + ": " + e.what(),
                  {{"line", line_no}});
    }
    registry.register_tool(std::move(spec));
  }
  return registry;
}

ToolRegistry read_tool_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw registry_error("IoError", "cannot open tool corpus " + path.string());
  return read_tool_corpus(in);
}

void write_tool_corpus(const ToolRegistry& registry, std::ostream& out) {
  for (const ToolSpec& spec : registry.tools()) {
    out << nlohmann::json(spec).dump() << '\n';
  }
}

void write_tool_corpus(const ToolRegistry& registry, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw registry_error("IoError", "cannot write tool corpus " + path.string());
  write_tool_corpus(registry, out);
}

}  // namespace docplan
