#include "docplan/progdsl.hpp"

#include <charconv>
#include <fstream>

#include "docplan/error.hpp"
#include "docplan/text.hpp"

namespace docplan::dsl {

namespace {

Error dsl_error(std::string kind, const std::string& message,
                nlohmann::json details = nlohmann::json::object()) {
  return Error("progdsl", std::move(kind), message, std::move(details));
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || is_upper(c) || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

// Parses one source line. Columns are 1-based.
class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : s_(line), line_no_(line_no) {}

  // Returns nullopt for blank and comment-only lines.
  std::optional<Step> parse() {
    skip_space();
    if (at_end()) return std::nullopt;
    Step step;
    step.line = line_no_;
    step.target = upper_name("variable name");
    skip_space();
    expect('=');
    skip_space();
    step.module = upper_name("module name");
    skip_space();
    expect('(');
    skip_space();
    std::set<std::string> keys;
    if (peek() != ')') {
      while (true) {
        skip_space();
        const std::size_t key_col = col();
        Arg arg;
        arg.key = key();
        if (!keys.insert(arg.key).second) fail(key_col, "distinct argument key");
        skip_space();
        expect('=');
        skip_space();
        arg.value = value();
        step.args.push_back(std::move(arg));
        skip_space();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    skip_space();
    if (!at_end()) fail(col(), "end of line");
    return step;
  }

 private:
  bool at_end() const { return pos_ >= s_.size() || s_[pos_] == '#'; }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  std::size_t col() const { return pos_ + 1; }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  [[noreturn]] void fail(std::size_t column, const std::string& expected) const {
    std::string found = pos_ < s_.size() ? std::string("'") + s_[pos_] + "'" : "end of line";
    throw dsl_error("SyntaxError",
                    "line " + std::to_string(line_no_) + ", col " + std::to_string(column) + ": expected " +
                        expected + ", found " + found,
                    {{"line", line_no_}, {"col", column}, {"expected", expected}});
  }

  void expect(char c) {
    if (peek() != c) fail(col(), std::string("'") + c + "'");
    ++pos_;
  }

  std::string upper_name(const std::string& what) {
    if (!is_upper(peek())) fail(col(), what + " [A-Z][A-Z0-9_]*");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (is_upper(s_[pos_]) || is_digit(s_[pos_]) || s_[pos_] == '_')) ++pos_;
    if (pos_ < s_.size() && is_ident_char(s_[pos_])) fail(col(), what + " [A-Z][A-Z0-9_]*");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string key() {
    if (!is_ident_start(peek())) fail(col(), "argument key");
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  Value value() {
    const char c = peek();
    if (c == '\'') return string_literal();
    if (c == '-' || is_digit(c)) return number();
    if (is_upper(c)) return VarRef{upper_name("variable name")};
    fail(col(), "value (string, number or variable)");
  }

  std::string string_literal() {
    const std::size_t open_col = col();
    ++pos_;
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '\'') return out;
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        if (e != '\\' && e != '\'') {
          pos_ -= 2;
          fail(col(), "escape \\\\ or \\'");
        }
        out.push_back(e);
        continue;
      }
      out.push_back(c);
    }
    fail(open_col, "closing quote");
  }

  double number() {
    const std::size_t start = pos_;
    if (peek() == '-') ++pos_;
    if (pos_ >= s_.size() || !is_digit(s_[pos_])) fail(col(), "digit");
    while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      if (pos_ >= s_.size() || !is_digit(s_[pos_])) fail(col(), "digit after '.'");
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    }
    double v = 0.0;
    const auto r = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (r.ec != std::errc{}) fail(start + 1, "representable number");
    return v;
  }

  std::string_view s_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

std::string render_number(double v) {
  char buf[512];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, r.ptr);
}

nlohmann::json canonical_value(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : v) out.push_back(canonical_value(e));
    return out;
  }
  if (v.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, e] : v.items()) out[k] = canonical_value(e);
    return out;
  }
  return v;
}

}  // namespace

Program parse_program(std::string_view source, const ParseOptions& options) {
  Program program;
  std::set<std::string> defined(options.inputs.begin(), options.inputs.end());
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(source)) {
    ++line_no;
    std::optional<Step> step = LineParser(line, line_no).parse();
    if (!step) continue;
    const std::size_t index = program.steps.size() + 1;
    for (const Arg& arg : step->args) {
      if (const auto* ref = std::get_if<VarRef>(&arg.value); ref && !defined.contains(ref->name)) {
        throw dsl_error("UndefinedVariable",
                        "step " + std::to_string(index) + " (line " + std::to_string(line_no) +
                            ") uses undefined variable " + ref->name,
                        {{"step", index}, {"line", line_no}, {"name", ref->name}});
      }
    }
    if (!defined.insert(step->target).second) {
      throw dsl_error("DuplicateTarget",
                      "step " + std::to_string(index) + " (line " + std::to_string(line_no) +
                          ") reassigns " + step->target,
                      {{"step", index}, {"line", line_no}, {"name", step->target}});
    }
    program.steps.push_back(std::move(*step));
  }
  return program;
}

std::string render_value(const Value& value) {
  if (const auto* s = std::get_if<std::string>(&value)) {
    std::string out = "'";
    for (char c : *s) {
      if (c == '\\' || c == '\'') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('\'');
    return out;
  }
  if (const auto* d = std::get_if<double>(&value)) return render_number(*d);
  return std::get<VarRef>(value).name;
}

std::string render(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const Step& step = program.steps[i];
    if (i) out.push_back('\n');
    out += step.target + "=" + step.module + "(";
    for (std::size_t a = 0; a < step.args.size(); ++a) {
      if (a) out.push_back(',');
      out += step.args[a].key + "=" + render_value(step.args[a].value);
    }
    out.push_back(')');
  }
  return out;
}

std::vector<std::string> module_sequence(const Program& program) {
  std::vector<std::string> names;
  for (const Step& step : program.steps) names.push_back(step.module);
  return names;
}

bool pipeline_equivalent(const Program& a, const Program& b) { return module_sequence(a) == module_sequence(b); }

nlohmann::json canonicalize_args(const nlohmann::json& args) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, v] : args.items()) {
    out[key] = v.is_string() ? nlohmann::json(std::string(text::trim(v.get<std::string>()))) : canonical_value(v);
  }
  return out;
}

MockModule::MockModule(std::string name, std::vector<std::pair<nlohmann::json, nlohmann::json>> fixtures)
    : name_(std::move(name)) {
  bool first = true;
  for (auto& [args, output] : fixtures) {
    if (!args.is_object()) throw dsl_error("InvalidFixture", name_ + ": fixture args must be an object");
    std::set<std::string> keys;
    for (const auto& [k, _] : args.items()) keys.insert(k);
    if (first) {
      required_keys_ = keys;
      first = false;
    } else {
      std::set<std::string> common;
      for (const std::string& k : required_keys_) {
        if (keys.contains(k)) common.insert(k);
      }
      required_keys_ = std::move(common);
    }
    const std::string canonical = canonicalize_args(args).dump();
    if (!table_.emplace(canonical, std::move(output)).second) {
      throw dsl_error("InvalidFixture", name_ + ": duplicate fixture args " + canonical);
    }
  }
}

const nlohmann::json* MockModule::lookup(const nlohmann::json& canonical_args) const {
  auto it = table_.find(canonical_args.dump());
  return it == table_.end() ? nullptr : &it->second;
}

void ModuleTable::add(MockModule module) {
  std::string name = module.name();
  modules_.insert_or_assign(std::move(name), std::move(module));
}

const MockModule* ModuleTable::find(std::string_view name) const {
  auto it = modules_.find(name);
  return it == modules_.end() ? nullptr : &it->second;
}

std::vector<std::string> ModuleTable::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : modules_) out.push_back(n);
  return out;
}

ModuleTable ModuleTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw dsl_error("InvalidFixture", "fixture file must be a JSON object");
  ModuleTable table;
  for (const auto& [name, entries] : j.items()) {
    std::vector<std::pair<nlohmann::json, nlohmann::json>> fixtures;
    try {
      for (const auto& e : entries) fixtures.emplace_back(e.at("args"), e.at("output"));
    } catch (const nlohmann::json::exception& e) {
      throw dsl_error("InvalidFixture", name + ": " + e.what());
    }
    table.add(MockModule(name, std::move(fixtures)));
  }
  return table;
}

ModuleTable ModuleTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dsl_error("IoError", "cannot open fixtures " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw dsl_error("InvalidFixture", std::string("malformed fixture file: ") + e.what());
  }
}

const nlohmann::json* ExecutionResult::binding(std::string_view name) const {
  for (const auto& [n, v] : bindings) {
    if (n == name) return &v;
  }
  return nullptr;
}

std::vector<std::string> ExecutionResult::module_sequence() const {
  std::vector<std::string> names;
  for (const TraceEntry& t : trace) names.push_back(t.module);
  return names;
}

nlohmann::json ExecutionResult::trace_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const TraceEntry& t : trace) {
    out.push_back({{"step", t.step},
                   {"target", t.target},
                   {"module", t.module},
                   {"args", t.args},
                   {"output_digest", t.output_digest}});
  }
  return out;
}

ExecutionResult execute(const Program& program, const std::map<std::string, nlohmann::json>& inputs,
                        const ModuleTable& modules) {
  ExecutionResult result;
  std::map<std::string, nlohmann::json, std::less<>> env;
  for (const auto& [name, value] : inputs) {
    env.emplace(name, value);
    result.bindings.emplace_back(name, value);
  }

  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const Step& step = program.steps[i];
    const std::size_t index = i + 1;
    const nlohmann::json where = {{"step", index}, {"line", step.line}, {"module", step.module}};

    const MockModule* module = modules.find(step.module);
    if (module == nullptr) {
      throw dsl_error("UnknownModule", "step " + std::to_string(index) + ": unknown module " + step.module, where);
    }

    nlohmann::json args = nlohmann::json::object();
    for (const Arg& arg : step.args) {
      if (const auto* s = std::get_if<std::string>(&arg.value)) {
        args[arg.key] = *s;
      } else if (const auto* d = std::get_if<double>(&arg.value)) {
        args[arg.key] = *d;
      } else {
        const std::string& name = std::get<VarRef>(arg.value).name;
        auto it = env.find(name);
        if (it == env.end()) {
          nlohmann::json details = where;
          details["name"] = name;
          throw dsl_error("MissingInput", "step " + std::to_string(index) + ": variable " + name + " is not bound",
                          details);
        }
        args[arg.key] = it->second;
      }
    }
    for (const std::string& key : module->required_keys()) {
      if (!args.contains(key)) {
        nlohmann::json details = where;
        details["key"] = key;
        throw dsl_error("MissingArgKey",
                        "step " + std::to_string(index) + ": " + step.module + " requires argument '" + key + "'",
                        details);
      }
    }

    const nlohmann::json canonical = canonicalize_args(args);
    const nlohmann::json* output = module->lookup(canonical);
    if (output == nullptr) {
      nlohmann::json details = where;
      details["args"] = canonical;
      throw dsl_error("FixtureMiss",
                      "step " + std::to_string(index) + ": no fixture for " + step.module + canonical.dump(), details);
    }

    env.insert_or_assign(step.target, *output);
    result.bindings.emplace_back(step.target, *output);
    result.trace.push_back({index, step.target, step.module, canonical, text::sha256_hex(output->dump())});
  }

  if (!program.steps.empty()) result.result = env.at(program.steps.back().target);
  return result;
}

}  // namespace docplan::dsl
