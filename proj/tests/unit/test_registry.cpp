#include <doctest.h>

#include <sstream>

#include "docplan/error.hpp"
#include "docplan/registry.hpp"

using namespace docplan;

namespace {

ToolSpec spec(const std::string& id, const std::string& sig = "") {
  return ToolSpec{id, id, sig, "Does " + id + " things.", {}};
}

std::string kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace

TEST_CASE("register, lookup, duplicates") {
  ToolRegistry reg;
  reg.register_tool(spec("llmcloud run deploy", "llmcloud run deploy SERVICE"));
  reg.register_tool(spec("llmutil cp"));
  CHECK(reg.size() == 2);
  CHECK(reg.tools()[0].tool_id == "llmcloud run deploy");
  CHECK(reg.lookup("llmutil cp").name == "llmutil cp");
  CHECK(reg.contains("llmutil cp"));
  CHECK(reg.find("nope") == nullptr);
  CHECK(kind_of([&] { reg.lookup("nope"); }) == "UnknownToolId");
  CHECK(kind_of([&] { reg.register_tool(spec("llmutil cp")); }) == "DuplicateToolId");
  CHECK(reg.size() == 2);
}

TEST_CASE("render_doc styles") {
  ToolSpec t = spec("tool", "tool ARG");
  CHECK(render_doc(t, DocStyle::SignatureFirst) == "tool ARG\nDoes tool things.");
  CHECK(render_doc(t, DocStyle::ProseFirst) == "Does tool things.\nUsage: tool ARG");
  t.signature.clear();
  CHECK(render_doc(t, DocStyle::SignatureFirst) == "tool\nDoes tool things.");
  CHECK(parse_doc_style(to_string(DocStyle::ProseFirst)) == DocStyle::ProseFirst);
}

TEST_CASE("render_doc ignores demos") {
  ToolSpec a = spec("tool", "tool ARG");
  ToolSpec b = a;
  b.demo_pool = {{"do it", "tool 1"}, {"again", "tool 2"}};
  for (DocStyle s : {DocStyle::SignatureFirst, DocStyle::ProseFirst}) {
    CHECK(render_doc(a, s) == render_doc(b, s));
  }
}

TEST_CASE("demo pools are keyed separately from tools") {
  ToolRegistry reg;
  reg.register_tool(spec("t"));
  reg.attach_demo_pool("benchmark", {{"i", "p"}});
  CHECK(reg.demo_pool("benchmark").size() == 1);
  reg.attach_demo_pool("benchmark", {{"i", "p"}, {"j", "q"}});
  CHECK(reg.demo_pool("benchmark").size() == 2);
  CHECK(reg.demo_pool_keys() == std::vector<std::string>{"benchmark"});
  CHECK(kind_of([&] { reg.demo_pool("missing"); }) != "");
}

TEST_CASE("tool corpus round trip") {
  ToolRegistry reg;
  ToolSpec t = spec("a b", "a b X");
  t.demo_pool = {{"how", "a b 1\na b 2"}};
  reg.register_tool(t);
  reg.register_tool(spec("c"));
  std::stringstream buf;
  write_tool_corpus(reg, buf);
  const ToolRegistry back = read_tool_corpus(buf);
  REQUIRE(back.size() == 2);
  CHECK(back.tools()[0] == reg.tools()[0]);
  CHECK(back.tools()[1] == reg.tools()[1]);
}
