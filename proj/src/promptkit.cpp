#include "docplan/promptkit.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "docplan/error.hpp"
#include "docplan/text.hpp"

namespace docplan::prompt {

namespace {

Error prompt_error(std::string kind, const std::string& message) {
  return Error("promptkit", std::move(kind), message);
}

constexpr std::string_view kDefaultTemplate =
    "{{system}}\n"
    "{{#documentation}}\n"
    "\n"
    "Documentation:\n"
    "{{documentation}}\n"
    "{{/documentation}}\n"
    "{{#examples}}\n"
    "\n"
    "Examples:\n"
    "{{examples}}\n"
    "{{/examples}}\n"
    "\n"
    "Question: {{question}}\n"
    "{{answer_format}}\n";

constexpr std::string_view kSystemText =
    "You are a command-line assistant. Answer the question with the sequence of commands that "
    "accomplishes it.";

const std::set<std::string, std::less<>> kLabels = {std::string(kSystem), std::string(kDocumentation),
                                                    std::string(kExamples), std::string(kQuestion),
                                                    std::string(kAnswerFormat)};

// Returns the name inside a standalone "{{#name}}" / "{{/name}}" line.
std::optional<std::pair<char, std::string>> block_tag(std::string_view line) {
  line = text::trim(line);
  if (line.size() < 6 || line.substr(0, 2) != "{{" || line.substr(line.size() - 2) != "}}") return std::nullopt;
  const char kind = line[2];
  if (kind != '#' && kind != '/') return std::nullopt;
  return std::make_pair(kind, std::string(line.substr(3, line.size() - 5)));
}

template <typename OnPlaceholder>
std::string substitute(std::string_view line, OnPlaceholder&& on_placeholder) {
  std::string out;
  std::size_t i = 0;
  while (i < line.size()) {
    const std::size_t open = line.find("{{", i);
    if (open == std::string_view::npos) break;
    const std::size_t close = line.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(line.substr(i, open - i));
    out += on_placeholder(line.substr(open + 2, close - open - 2));
    i = close + 2;
  }
  out.append(line.substr(i));
  return out;
}

std::string render_demo(const DemoExample& demo) {
  std::string out = "Instruction: " + demo.instruction + "\n";
  out += kAnswerMarker;
  out += '\n';
  out += demo.plan;
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const PromptCondition& c) {
  j = {{"use_docs", c.use_docs}, {"shots", c.shots}, {"demo_seed", c.demo_seed}, {"retrieval", c.retrieval}};
}

void from_json(const nlohmann::json& j, PromptCondition& c) {
  c.use_docs = j.value("use_docs", false);
  c.shots = j.value("shots", std::size_t{0});
  c.demo_seed = j.value("demo_seed", std::uint64_t{0});
  if (j.contains("retrieval")) c.retrieval = j.at("retrieval").get<retrieval::RetrievalConfig>();
}

const Section* Prompt::section(std::string_view label) const {
  for (const Section& s : sections) {
    if (s.label == label) return &s;
  }
  return nullptr;
}

PromptTemplate PromptTemplate::default_template() { return from_text(std::string(kDefaultTemplate)); }

PromptTemplate PromptTemplate::from_text(std::string body) {
  std::vector<std::string> open;
  bool has_question = false;
  for (const std::string& line : text::split_lines(body)) {
    if (auto tag = block_tag(line)) {
      if (!kLabels.contains(tag->second)) {
        throw prompt_error("InvalidTemplate", "unknown section '" + tag->second + "'");
      }
      if (tag->first == '#') {
        open.push_back(tag->second);
      } else if (open.empty() || open.back() != tag->second) {
        throw prompt_error("InvalidTemplate", "unbalanced block '" + tag->second + "'");
      } else {
        open.pop_back();
      }
      continue;
    }
    substitute(line, [&](std::string_view name) {
      if (!kLabels.contains(name)) {
        throw prompt_error("InvalidTemplate", "unknown placeholder '" + std::string(name) + "'");
      }
      if (name == kQuestion) has_question = true;
      return std::string{};
    });
  }
  if (!open.empty()) throw prompt_error("InvalidTemplate", "unclosed block '" + open.back() + "'");
  if (!has_question) throw prompt_error("InvalidTemplate", "template lacks {{question}}");
  PromptTemplate t;
  t.text_ = std::move(body);
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw prompt_error("IoError", "cannot open template " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::string PromptTemplate::digest() const { return text::sha256_hex(text_); }

std::string PromptTemplate::render(const std::vector<Section>& sections) const {
  auto find = [&](std::string_view label) -> const Section* {
    for (const Section& s : sections) {
      if (s.label == label) return &s;
    }
    return nullptr;
  };
  std::vector<bool> emitting;
  std::vector<std::string> out;
  for (const std::string& line : text::split_lines(text_)) {
    if (auto tag = block_tag(line)) {
      if (tag->first == '#') {
        emitting.push_back(find(tag->second) != nullptr);
      } else {
        emitting.pop_back();
      }
      continue;
    }
    if (std::find(emitting.begin(), emitting.end(), false) != emitting.end()) continue;
    out.push_back(substitute(line, [&](std::string_view name) {
      const Section* s = find(name);
      return s ? s->text : std::string{};
    }));
  }
  std::string rendered;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) rendered.push_back('\n');
    rendered += out[i];
  }
  return rendered;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) throw prompt_error("NotEnoughDemos", "requested " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  // mt19937_64 output is fully specified; the bounded draw is done by hand
  // because std::uniform_int_distribution differs between standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t range = n - i;
    const std::uint64_t threshold = (0 - range) % range;
    std::uint64_t r = rng();
    while (r < threshold) r = rng();
    std::swap(pool[i], pool[i + static_cast<std::size_t>(r % range)]);
  }
  pool.resize(k);
  return pool;
}

std::vector<DemoExample> select_demos(const std::vector<DemoExample>& pool, std::size_t shots,
                                      std::uint64_t seed) {
  std::vector<DemoExample> out;
  for (std::size_t i : sample_indices(pool.size(), shots, seed)) out.push_back(pool[i]);
  return out;
}

retrieval::RetrievalIndex build_tool_index(const ToolRegistry& registry,
                                           const retrieval::RetrievalConfig& config) {
  std::vector<retrieval::RetrievalIndex::Document> docs;
  docs.reserve(registry.size());
  for (const ToolSpec& tool : registry.tools()) {
    docs.emplace_back(tool.tool_id, render_doc(tool, DocStyle::SignatureFirst));
  }
  return retrieval::RetrievalIndex::build(docs, config);
}

Prompt assemble_prompt(const forge::BenchmarkTask& task, const PromptCondition& condition,
                       const ToolRegistry& registry, const retrieval::RetrievalIndex* index,
                       const std::vector<DemoExample>& demo_pool, const PromptTemplate& tmpl) {
  condition.retrieval.validate();
  Prompt prompt;
  prompt.provenance.task_id = task.task_id;
  prompt.provenance.condition = condition;

  prompt.sections.push_back({std::string(kSystem), std::string(kSystemText)});

  if (condition.use_docs) {
    if (index == nullptr) throw prompt_error("MissingIndex", "docs condition requires a retrieval index");
    const auto& rc = condition.retrieval;
    std::vector<std::string> ids;
    std::vector<std::string> bodies;
    std::size_t total_words = 0;
    for (const retrieval::ScoredDoc& hit : index->query(task.question, rc.top_k)) {
      std::string body = retrieval::truncate_words(
          render_doc(registry.lookup(hit.doc_id), DocStyle::SignatureFirst), rc.doc_word_limit);
      total_words += retrieval::word_count(body);
      ids.push_back(hit.doc_id);
      bodies.push_back(std::move(body));
    }
    if (ids.empty()) prompt.provenance.warnings.push_back("empty retrieval: no document shares a term with the question");
    std::size_t dropped = 0;
    while (rc.prompt_budget_words > 0 && total_words > rc.prompt_budget_words && !bodies.empty()) {
      total_words -= retrieval::word_count(bodies.back());
      bodies.pop_back();
      ids.pop_back();
      ++dropped;
    }
    if (dropped) {
      prompt.provenance.warnings.push_back("prompt budget: dropped " + std::to_string(dropped) +
                                           " lowest-ranked document(s)");
    }
    std::string doc_text;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      if (i) doc_text += "\n\n";
      doc_text += bodies[i];
    }
    prompt.provenance.retrieved_doc_ids = std::move(ids);
    prompt.sections.push_back({std::string(kDocumentation), std::move(doc_text)});
  }

  if (condition.shots > 0) {
    prompt.provenance.demo_ids = sample_indices(demo_pool.size(), condition.shots, condition.demo_seed);
    std::string examples;
    for (std::size_t i = 0; i < prompt.provenance.demo_ids.size(); ++i) {
      if (i) examples += "\n\n";
      examples += render_demo(demo_pool[prompt.provenance.demo_ids[i]]);
    }
    prompt.sections.push_back({std::string(kExamples), std::move(examples)});
  }

  prompt.sections.push_back({std::string(kQuestion), task.question});
  std::string answer = "Answer with one command per line after the marker \"";
  answer += kAnswerMarker;
  answer += "\".\n";
  answer += kAnswerMarker;
  prompt.sections.push_back({std::string(kAnswerFormat), std::move(answer)});

  prompt.rendered = tmpl.render(prompt.sections);
  return prompt;
}

}  // namespace docplan::prompt
