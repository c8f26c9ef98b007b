#include "docplan/corpusforge.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "docplan/error.hpp"
#include "docplan/text.hpp"

namespace docplan::forge {

namespace {

Error forge_error(std::string kind, const std::string& message,
                  nlohmann::json details = nlohmann::json::object()) {
  return Error("corpusforge", std::move(kind), message, std::move(details));
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

constexpr std::array<std::string_view, 40> kBlockTags = {
    "address", "article", "aside",  "blockquote", "body",   "br",      "caption", "dd",
    "div",     "dl",      "dt",     "fieldset",   "figcaption", "figure", "footer", "form",
    "h1",      "h2",      "h3",     "h4",         "h5",     "h6",      "head",    "header",
    "hr",      "html",    "li",     "main",       "nav",    "ol",      "p",       "pre",
    "section", "table",   "tbody",  "thead",      "title",  "tr",      "ul",      "tfoot"};

bool is_block_tag(std::string_view name) {
  return std::find(kBlockTags.begin(), kBlockTags.end(), name) != kBlockTags.end();
}

bool is_cell_tag(std::string_view name) { return name == "td" || name == "th"; }

bool starts_tag(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '/' || c == '!' || c == '?';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct Entity {
  std::string value;
  std::size_t length = 0;  // bytes consumed, including '&' and ';'
};

// Decodes the character reference starting at s[pos] == '&'.
std::optional<Entity> decode_entity(std::string_view s, std::size_t pos) {
  const std::size_t semi = s.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 12 || semi == pos + 1) return std::nullopt;
  std::string_view body = s.substr(pos + 1, semi - pos - 1);
  std::string value;
  if (body.front() == '#') {
    std::uint32_t cp = 0;
    std::from_chars_result r{};
    if (body.size() > 1 && (body[1] == 'x' || body[1] == 'X')) {
      r = std::from_chars(body.data() + 2, body.data() + body.size(), cp, 16);
      if (body.size() == 2) return std::nullopt;
    } else {
      r = std::from_chars(body.data() + 1, body.data() + body.size(), cp, 10);
      if (body.size() == 1) return std::nullopt;
    }
    if (r.ec != std::errc{} || r.ptr != body.data() + body.size()) return std::nullopt;
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
    append_utf8(value, cp);
  } else {
    static const std::map<std::string_view, std::string_view> kNamed = {
        {"amp", "&"},   {"lt", "<"},    {"gt", ">"},     {"quot", "\""}, {"apos", "'"},
        {"nbsp", " "},  {"ndash", "\xE2\x80\x93"},       {"mdash", "\xE2\x80\x94"},
        {"hellip", "\xE2\x80\xA6"},     {"copy", "\xC2\xA9"}, {"reg", "\xC2\xAE"},
        {"lsquo", "\xE2\x80\x98"},      {"rsquo", "\xE2\x80\x99"},
        {"ldquo", "\xE2\x80\x9C"},      {"rdquo", "\xE2\x80\x9D"}};
    auto it = kNamed.find(body);
    if (it == kNamed.end()) return std::nullopt;
    value = it->second;
  }
  return Entity{std::move(value), semi - pos + 1};
}

// A decoded '<' or '&' must not create markup that a second pass would
// consume; such references are left encoded so stripping stays idempotent.
bool decoding_would_create_markup(std::string_view s, const Entity& e, std::size_t pos) {
  const std::size_t next = pos + e.length;
  if (e.value == "<") return next < s.size() && starts_tag(s[next]);
  if (e.value == "&") {
    std::string probe = "&";
    probe.append(s.substr(next, 16));
    return decode_entity(probe, 0).has_value();
  }
  return false;
}

// Skips a tag beginning at s[pos] == '<'; returns the lowercase tag name
// ("/p" for closers, "" for comments and declarations) and advances pos.
std::string skip_tag(std::string_view s, std::size_t& pos) {
  if (s.compare(pos, 4, "<!--") == 0) {
    const std::size_t end = s.find("-->", pos + 4);
    pos = end == std::string_view::npos ? s.size() : end + 3;
    return {};
  }
  std::size_t i = pos + 1;
  std::string name;
  if (i < s.size() && s[i] == '/') {
    name.push_back('/');
    ++i;
  }
  if (i < s.size() && (s[i] == '!' || s[i] == '?')) {
    name.clear();
  } else {
    while (i < s.size() && (text::is_word_char(s[i]) || s[i] == ':')) name.push_back(lower(s[i++]));
  }
  char quote = 0;
  while (i < s.size()) {
    const char c = s[i++];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      break;
    }
  }
  pos = i;
  return name;
}

std::string normalize_whitespace(std::string_view raw) {
  std::string out;
  for (const std::string& line : text::split_lines(raw)) {
    std::string collapsed = text::collapse_whitespace(line);
    if (collapsed.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += collapsed;
  }
  return out;
}

}  // namespace

namespace {

std::string strip_once(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == '<' && i + 1 < raw.size() && starts_tag(raw[i + 1])) {
      const std::string name = skip_tag(raw, i);
      if (name == "script" || name == "style") {
        const std::string closer = "</" + name;
        std::size_t end = i;
        while (true) {
          end = raw.find("</", end);
          if (end == std::string_view::npos) {
            i = raw.size();
            break;
          }
          if (lowercase(raw.substr(end, closer.size())) == closer) {
            i = end;
            skip_tag(raw, i);
            break;
          }
          end += 2;
        }
        out.push_back('\n');
        continue;
      }
      std::string_view bare = name;
      if (!bare.empty() && bare.front() == '/') bare.remove_prefix(1);
      if (is_block_tag(bare)) {
        out.push_back('\n');
      } else if (is_cell_tag(bare)) {
        out.push_back(' ');
      }
      continue;
    }
    if (c == '&') {
      if (auto entity = decode_entity(raw, i); entity && !decoding_would_create_markup(raw, *entity, i)) {
        out += entity->value;
        i += entity->length;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return normalize_whitespace(out);
}

}  // namespace

std::string strip_markup(std::string_view raw) {
  if (!text::is_valid_utf8(raw)) {
    throw forge_error("InvalidEncoding", "input is not valid UTF-8");
  }
  // After the first pass whitespace is canonical, so any further change
  // removes markup and shortens the text; the loop terminates.
  std::string current = strip_once(raw);
  while (true) {
    std::string next = strip_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

RenameMap::RenameMap(std::vector<Entry> entries) {
  std::map<std::string, std::string> seen;
  for (auto& [source, target] : entries) {
    if (source.empty() || target.empty()) {
      throw forge_error("InvalidRenameMap", "rename map entries must be non-empty");
    }
    auto [it, inserted] = seen.emplace(source, target);
    if (!inserted) {
      if (it->second != target) {
        throw forge_error("InvalidRenameMap",
                          "source token '" + source + "' mapped to both '" + it->second +
                              "' and '" + target + "'");
      }
      continue;
    }
    entries_.emplace_back(std::move(source), std::move(target));
  }
  ordered_ = entries_;
  std::stable_sort(ordered_.begin(), ordered_.end(), [](const Entry& a, const Entry& b) {
    return a.first.size() > b.first.size();
  });
}

nlohmann::json RenameMap::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [s, t] : entries_) arr.push_back({s, t});
  return arr;
}

std::string RenameMap::digest() const { return text::sha256_hex(to_json().dump()); }

RenameMap rename_map_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw forge_error("InvalidRenameMap", "rename map must be a JSON array");
  std::vector<RenameMap::Entry> entries;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
      throw forge_error("InvalidRenameMap", "each entry must be a [source, target] string pair");
    }
    entries.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
  }
  return RenameMap(std::move(entries));
}

RenameMap read_rename_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw forge_error("IoError", "cannot open rename map " + path.string());
  try {
    return rename_map_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw forge_error("InvalidRenameMap", std::string("malformed rename map: ") + e.what());
  }
}

std::string apply_rename(std::string_view input, const RenameMap& map) {
  if (map.empty()) return std::string(input);
  std::string out;
  out.reserve(input.size() + input.size() / 8);
  std::size_t i = 0;
  while (i < input.size()) {
    bool replaced = false;
    for (const auto& [source, target] : map.application_order()) {
      if (text::matches_at_boundary(input, i, source)) {
        out += target;
        i += source.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(input[i++]);
  }
  return out;
}

std::vector<LeakageViolation> check_leakage(std::string_view input,
                                            const std::set<std::string>& forbidden) {
  std::vector<LeakageViolation> violations;
  for (std::size_t i = 0; i < input.size(); ++i) {
    for (const std::string& token : forbidden) {
      if (text::matches_at_boundary(input, i, token)) violations.push_back({token, i});
    }
  }
  return violations;
}

const BenchmarkTask* Benchmark::find_task(std::string_view task_id) const {
  for (const BenchmarkTask& t : tasks) {
    if (t.task_id == task_id) return &t;
  }
  return nullptr;
}

nlohmann::json to_json(const Benchmark& b) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const BenchmarkTask& t : b.tasks) {
    tasks.push_back({{"task_id", t.task_id}, {"question", t.question}, {"gold_plan", t.gold_plan.lines}});
  }
  return {{"tasks", tasks},
          {"demo_pool", b.demo_pool},
          {"metadata",
           {{"source_corpus", b.metadata.source_corpus},
            {"rename_map_digest", b.metadata.rename_map_digest},
            {"creation_seed", b.metadata.creation_seed}}}};
}

Benchmark benchmark_from_json(const nlohmann::json& j) {
  try {
    Benchmark b;
    for (const auto& t : j.at("tasks")) {
      BenchmarkTask task;
      t.at("task_id").get_to(task.task_id);
      t.at("question").get_to(task.question);
      task.gold_plan = plan_from_lines(t.at("gold_plan").get<std::vector<std::string>>());
      b.tasks.push_back(std::move(task));
    }
    b.demo_pool = j.value("demo_pool", std::vector<DemoExample>{});
    if (j.contains("metadata")) {
      const auto& m = j.at("metadata");
      b.metadata.source_corpus = m.value("source_corpus", std::string{});
      b.metadata.rename_map_digest = m.value("rename_map_digest", std::string{});
      b.metadata.creation_seed = m.value("creation_seed", std::uint64_t{0});
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw forge_error("InvalidBenchmark", std::string("malformed benchmark: ") + e.what());
  }
}

Benchmark read_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw forge_error("IoError", "cannot open benchmark " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw forge_error("InvalidBenchmark", std::string("malformed benchmark: ") + e.what());
  }
  return benchmark_from_json(j);
}

void write_benchmark(const Benchmark& b, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw forge_error("IoError", "cannot write benchmark " + path.string());
  out << to_json(b).dump(2) << '\n';
}

SourceTasks source_tasks_from_json(const nlohmann::json& j) {
  try {
    SourceTasks s;
    for (const auto& t : j.at("tasks")) {
      SourceTask task;
      t.at("task_id").get_to(task.task_id);
      t.at("question").get_to(task.question);
      t.at("gold_plan").get_to(task.gold_plan);
      s.tasks.push_back(std::move(task));
    }
    s.demo_pool = j.value("demo_pool", std::vector<DemoExample>{});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw forge_error("InvalidSourceTasks", std::string("malformed source tasks: ") + e.what());
  }
}

SourceTasks read_source_tasks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw forge_error("IoError", "cannot open source tasks " + path.string());
  try {
    return source_tasks_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw forge_error("InvalidSourceTasks", std::string("malformed source tasks: ") + e.what());
  }
}

ToolRegistry ingest_raw_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw forge_error("IoError", "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  ToolRegistry registry;
  for (const fs::path& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    ToolSpec spec;
    spec.tool_id = file.stem().string();
    spec.name = spec.tool_id;
    try {
      spec.doc_text = strip_markup(buf.str());
    } catch (const Error& e) {
      throw forge_error(e.kind(), file.filename().string() + ": " + e.what());
    }
    const std::vector<std::string> lines = text::split_lines(spec.doc_text);
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
      if (lowercase(text::trim(lines[i])) == "synopsis") {
        spec.signature = lines[i + 1];
        break;
      }
    }
    registry.register_tool(std::move(spec));
  }
  return registry;
}

namespace {

std::string_view leading_token(std::string_view line) {
  line = text::trim(line);
  const auto words = text::split_words(line);
  return words.empty() ? std::string_view{} : words.front();
}

void append_violations(nlohmann::json& out, std::string_view where, std::string_view content,
                       const std::set<std::string>& forbidden) {
  for (const LeakageViolation& v : check_leakage(content, forbidden)) {
    out.push_back({{"where", where}, {"token", v.token}, {"offset", v.offset}});
  }
}

}  // namespace

nlohmann::json scan_benchmark_leakage(const Benchmark& benchmark, const ToolRegistry& registry,
                                      const std::set<std::string>& forbidden) {
  nlohmann::json violations = nlohmann::json::array();
  for (const ToolSpec& tool : registry.tools()) {
    const std::string where = "tool:" + tool.tool_id;
    append_violations(violations, where + "/tool_id", tool.tool_id, forbidden);
    append_violations(violations, where + "/name", tool.name, forbidden);
    append_violations(violations, where + "/signature", tool.signature, forbidden);
    append_violations(violations, where + "/doc_text", tool.doc_text, forbidden);
    for (std::size_t d = 0; d < tool.demo_pool.size(); ++d) {
      const std::string dw = where + "/demos/" + std::to_string(d);
      append_violations(violations, dw + "/instruction", tool.demo_pool[d].instruction, forbidden);
      append_violations(violations, dw + "/plan", tool.demo_pool[d].plan, forbidden);
    }
  }
  for (const BenchmarkTask& task : benchmark.tasks) {
    const std::string where = "task:" + task.task_id;
    append_violations(violations, where + "/question", task.question, forbidden);
    append_violations(violations, where + "/gold_plan", task.gold_plan.to_text(), forbidden);
  }
  for (std::size_t d = 0; d < benchmark.demo_pool.size(); ++d) {
    const std::string where = "demo:" + std::to_string(d);
    append_violations(violations, where + "/instruction", benchmark.demo_pool[d].instruction, forbidden);
    append_violations(violations, where + "/plan", benchmark.demo_pool[d].plan, forbidden);
  }
  return violations;
}

ForgeResult build_benchmark(const SourceTasks& source, const RenameMap& map,
                            const ToolRegistry& source_registry, const ForgeOptions& options) {
  ForgeResult result;
  auto rename_demo = [&](const DemoExample& d) {
    return DemoExample{apply_rename(d.instruction, map), apply_rename(d.plan, map)};
  };

  for (const ToolSpec& tool : source_registry.tools()) {
    ToolSpec renamed;
    renamed.tool_id = apply_rename(tool.tool_id, map);
    renamed.name = apply_rename(tool.name, map);
    renamed.signature = apply_rename(tool.signature, map);
    renamed.doc_text = apply_rename(tool.doc_text, map);
    for (const DemoExample& d : tool.demo_pool) renamed.demo_pool.push_back(rename_demo(d));
    result.registry.register_tool(std::move(renamed));
  }

  std::set<std::string, std::less<>> programs;
  for (const ToolSpec& tool : result.registry.tools()) {
    const std::string_view head = leading_token(tool.tool_id);
    if (!head.empty()) programs.emplace(head);
  }

  std::unordered_set<std::string> task_ids;
  for (const SourceTask& src : source.tasks) {
    if (!task_ids.insert(src.task_id).second) {
      throw forge_error("DuplicateTaskId", "duplicate task id " + src.task_id,
                        {{"task_id", src.task_id}});
    }
    BenchmarkTask task;
    task.task_id = src.task_id;
    task.question = apply_rename(src.question, map);
    std::vector<std::string> renamed_lines;
    for (const std::string& line : src.gold_plan) renamed_lines.push_back(apply_rename(line, map));
    task.gold_plan = plan_from_lines(renamed_lines);
    if (task.gold_plan.lines.size() < options.min_commands) {
      throw forge_error("InvalidGoldPlan",
                        "task " + src.task_id + " has " +
                            std::to_string(task.gold_plan.lines.size()) + " command(s); at least " +
                            std::to_string(options.min_commands) + " required",
                        {{"task_id", src.task_id}});
    }
    for (const std::string& line : task.gold_plan.lines) {
      const std::string_view head = leading_token(line);
      if (!programs.contains(head) && !options.passthrough.contains(std::string(head))) {
        throw forge_error("InvalidGoldPlan",
                          "task " + src.task_id + ": '" + std::string(head) +
                              "' is neither a registered tool nor an allowed passthrough",
                          {{"task_id", src.task_id}, {"line", line}});
      }
    }
    result.benchmark.tasks.push_back(std::move(task));
  }

  for (const DemoExample& d : source.demo_pool) result.benchmark.demo_pool.push_back(rename_demo(d));
  result.registry.attach_demo_pool("benchmark", result.benchmark.demo_pool);

  result.benchmark.metadata.source_corpus = options.source_corpus;
  result.benchmark.metadata.rename_map_digest = map.digest();
  result.benchmark.metadata.creation_seed = options.creation_seed;

  nlohmann::json violations =
      scan_benchmark_leakage(result.benchmark, result.registry, options.forbidden);
  if (!violations.empty()) {
    throw forge_error("LeakageDetected",
                      std::to_string(violations.size()) + " forbidden token occurrence(s) survived renaming",
                      {{"violations", violations}});
  }
  return result;
}

}  // namespace docplan::forge
