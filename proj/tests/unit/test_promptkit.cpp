#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "docplan/error.hpp"
#include "docplan/promptkit.hpp"

using namespace docplan;
using namespace docplan::prompt;

namespace {

std::string kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

ToolRegistry small_registry() {
  ToolRegistry reg;
  reg.register_tool({"llmcloud pubsub topics make", "llmcloud pubsub topics make", "llmcloud pubsub topics make TOPIC",
                     "Creates messaging topics for publishers.", {}});
  reg.register_tool({"llmcloud run deploy", "llmcloud run deploy", "llmcloud run deploy SERVICE --image=IMAGE",
                     "Deploys a container image as a serverless service. " + std::string(200, 'x'), {}});
  reg.register_tool({"llmutil cp", "llmutil cp", "llmutil cp SRC DST", "Copies files to storage buckets.", {}});
  return reg;
}

std::vector<DemoExample> demos(std::size_t n) {
  std::vector<DemoExample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"instruction " + std::to_string(i), "cmd " + std::to_string(i)});
  return out;
}

const forge::BenchmarkTask kTask{"t1", "Deploy a container image as a serverless service and copy files",
                                 plan_from_lines({"a", "b"})};

}  // namespace

TEST_CASE("zero-shot without docs has only system, question and answer format") {
  const ToolRegistry reg = small_registry();
  const Prompt p = assemble_prompt(kTask, {}, reg, nullptr, demos(3));
  std::vector<std::string> labels;
  for (const auto& s : p.sections) labels.push_back(s.label);
  CHECK(labels == std::vector<std::string>{"system", "question", "answer_format"});
  CHECK(p.rendered.find("Documentation:") == std::string::npos);
  CHECK(p.rendered.find("Examples:") == std::string::npos);
  CHECK(p.rendered.find("Question: " + kTask.question) != std::string::npos);
  CHECK(p.rendered.substr(p.rendered.size() - 10) == "Commands:\n");
  CHECK(p.provenance.task_id == "t1");
}

TEST_CASE("documentation section appears exactly when docs are used") {
  const ToolRegistry reg = small_registry();
  const auto index = build_tool_index(reg);
  PromptCondition c;
  c.use_docs = true;
  const Prompt p = assemble_prompt(kTask, c, reg, &index, {});
  REQUIRE(p.section(kDocumentation) != nullptr);
  CHECK(p.section(kExamples) == nullptr);
  CHECK(p.provenance.retrieved_doc_ids.front() == "llmcloud run deploy");
  CHECK(p.section(kDocumentation)->text.find("llmcloud run deploy SERVICE --image=IMAGE") == 0);
  CHECK(kind_of([&] { assemble_prompt(kTask, c, reg, nullptr, {}); }) == "MissingIndex");
}

TEST_CASE("per-document truncation and prompt budget") {
  const ToolRegistry reg = small_registry();
  const auto index = build_tool_index(reg);
  PromptCondition c;
  c.use_docs = true;
  c.retrieval.doc_word_limit = 3;
  Prompt p = assemble_prompt(kTask, c, reg, &index, {});
  const std::size_t n = p.provenance.retrieved_doc_ids.size();
  CHECK(retrieval::word_count(p.section(kDocumentation)->text) == 3 * n);
  CHECK(p.section(kDocumentation)->text.find("llmcloud run deploy\n\n") == 0);

  c.retrieval.prompt_budget_words = 4;
  p = assemble_prompt(kTask, c, reg, &index, {});
  CHECK(p.provenance.retrieved_doc_ids.size() == 1);
  REQUIRE(p.provenance.warnings.size() == 1);
  CHECK(p.provenance.warnings[0].find("dropped") != std::string::npos);
}

TEST_CASE("empty retrieval leaves an empty documentation section with a warning") {
  const ToolRegistry reg = small_registry();
  const auto index = build_tool_index(reg);
  PromptCondition c;
  c.use_docs = true;
  const forge::BenchmarkTask odd{"t2", "zzz qqq", plan_from_lines({"a", "b"})};
  const Prompt p = assemble_prompt(odd, c, reg, &index, {});
  REQUIRE(p.section(kDocumentation) != nullptr);
  CHECK(p.section(kDocumentation)->text.empty());
  CHECK(p.provenance.warnings.size() == 1);
}

TEST_CASE("demos are sampled deterministically and rendered with the answer marker") {
  const ToolRegistry reg = small_registry();
  PromptCondition c;
  c.shots = 2;
  c.demo_seed = 11;
  const auto pool = demos(5);
  const Prompt a = assemble_prompt(kTask, c, reg, nullptr, pool);
  const Prompt b = assemble_prompt(kTask, c, reg, nullptr, pool);
  CHECK(a.rendered == b.rendered);
  REQUIRE(a.provenance.demo_ids.size() == 2);
  const std::string& ex = a.section(kExamples)->text;
  const auto& d0 = pool[a.provenance.demo_ids[0]];
  CHECK(ex.find("Instruction: " + d0.instruction + "\nCommands:\n" + d0.plan) == 0);
  c.shots = 6;
  CHECK(kind_of([&] { assemble_prompt(kTask, c, reg, nullptr, pool); }) == "NotEnoughDemos");
}

TEST_CASE("sample_indices: distinct, in range, deterministic, roughly uniform") {
  CHECK(sample_indices(5, 0, 1).empty());
  CHECK(kind_of([] { sample_indices(3, 4, 1); }) == "NotEnoughDemos");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = sample_indices(20, 15, seed);
    CHECK(s == sample_indices(20, 15, seed));
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 15);
    for (std::size_t i : s) CHECK(i < 20);
  }
  std::map<std::size_t, int> first;
  for (std::uint64_t seed = 0; seed < 20000; ++seed) ++first[sample_indices(10, 1, seed)[0]];
  REQUIRE(first.size() == 10);
  for (const auto& [idx, count] : first) CHECK(std::abs(count - 2000) < 200);
  CHECK(sample_indices(10, 3, 1) != sample_indices(10, 3, 2));
  // Pinned so that a change of engine or draw procedure is noticed.
  std::mt19937_64 engine;
  engine.discard(9999);
  CHECK(engine() == 9981545732273789042ULL);
}

TEST_CASE("select_demos follows sample order") {
  const auto pool = demos(8);
  const auto idx = sample_indices(8, 4, 99);
  const auto sel = select_demos(pool, 4, 99);
  REQUIRE(sel.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(sel[i] == pool[idx[i]]);
}

TEST_CASE("custom templates") {
  const PromptTemplate t = PromptTemplate::from_text("Q={{question}}\n{{#examples}}\nEX\n{{/examples}}\nEND");
  CHECK(t.render({{"question", "why"}}) == "Q=why\nEND");
  CHECK(t.render({{"question", "why"}, {"examples", "e"}}) == "Q=why\nEX\nEND");
  CHECK(t.digest() != PromptTemplate::default_template().digest());
  CHECK(kind_of([] { PromptTemplate::from_text("{{nope}} {{question}}"); }) == "InvalidTemplate");
  CHECK(kind_of([] { PromptTemplate::from_text("{{#examples}}\n{{question}}"); }) == "InvalidTemplate");
  CHECK(kind_of([] { PromptTemplate::from_text("{{/examples}}\n{{question}}"); }) == "InvalidTemplate");
  CHECK(kind_of([] { PromptTemplate::from_text("no question"); }) == "InvalidTemplate");
}

TEST_CASE("condition json round trip") {
  PromptCondition c;
  c.use_docs = true;
  c.shots = 5;
  c.demo_seed = 123456789012345ULL;
  c.retrieval.doc_word_limit = 200;
  const nlohmann::json j = c;
  CHECK(j.get<PromptCondition>() == c);
}
