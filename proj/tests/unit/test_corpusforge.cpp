#include <doctest.h>

#include <fstream>
#include <random>

#include "docplan/corpusforge.hpp"
#include "docplan/error.hpp"
#include "oracles.hpp"

using namespace docplan;
using namespace docplan::forge;

namespace {

std::string kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

// Naive scan: every occurrence of `token` not glued to a word character.
std::size_t naive_hits(const std::string& s, const std::string& token) {
  std::size_t hits = 0;
  for (std::size_t pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos + 1)) {
    const bool left = pos == 0 || !word_char(s[pos - 1]);
    const bool right = pos + token.size() >= s.size() || !word_char(s[pos + token.size()]);
    if (left && right) ++hits;
  }
  return hits;
}

const std::set<std::string> kForbidden{"gcloud", "gsutil"};

}  // namespace

TEST_CASE("strip_markup removes tags, scripts and entities") {
  const std::string html =
      "<html><head><title>T</title><style>p { color: red; }</style>"
      "<script>var x = '<b>';</script></head>"
      "<body><nav><a href=\"/x\">Home</a></nav><h2>SYNOPSIS</h2>"
      "<pre>gcloud run deploy &lt;SERVICE&gt; --port=8080</pre>"
      "<p>Fish &amp; chips&nbsp;here &#x41;&#66;</p><!-- hidden --><table><tr><td>a</td><td>b</td></tr></table>"
      "</body></html>";
  const std::string out = strip_markup(html);
  CHECK(out.find("color") == std::string::npos);
  CHECK(out.find("var x") == std::string::npos);
  CHECK(out.find("hidden") == std::string::npos);
  CHECK(out.find('<') == std::string::npos);
  CHECK(out.find("Home") != std::string::npos);
  CHECK(out.find("SYNOPSIS\ngcloud run deploy") != std::string::npos);
  CHECK(out.find("Fish & chips here AB") != std::string::npos);
  CHECK(out.find("a b") != std::string::npos);
}

TEST_CASE("strip_markup keeps escaped markup escaped") {
  const std::string once = strip_markup("<p>use &lt;b&gt; for bold</p>");
  CHECK(strip_markup(once) == once);
  CHECK(once.find("<b>") == std::string::npos);
}

TEST_CASE("strip_markup rejects invalid utf8") {
  CHECK(kind_of([] { strip_markup("ok \xC3"); }) == "InvalidEncoding");
}

TEST_CASE("strip_markup is idempotent on random markup") {
  const char* pieces[] = {"<p>", "</p>", "<div class=\"x\">", "</div>", "<br/>", "<b>", "</b>", "&amp;", "&lt;",
                          "&gt;", "&#60;", "lt;", "&", "<", ">", " ", "\n", "\t", "word", "gcloud",
                          "<script>", "</script>", "<!--", "-->", "<td>", "caf\xC3\xA9", "&nbsp;", "p>", "/"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(pieces) - 1);
  std::uniform_int_distribution<int> len(0, 40);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int n = len(rng); n > 0; --n) s += pieces[pick(rng)];
    const std::string once = strip_markup(s);
    CHECK_MESSAGE(strip_markup(once) == once, s);
  }
}

TEST_CASE("rename is a single longest-first pass at word boundaries") {
  const RenameMap map({{"gcloud", "llmvm"}, {"create", "make"}});
  CHECK(apply_rename("gcloud compute create NAME", map) == "llmvm compute make NAME");

  const RenameMap chain({{"a", "b"}, {"b", "c"}});
  CHECK(apply_rename("a b", chain) == "b c");

  const RenameMap phrase({{"create", "build"}, {"jobs create", "jobs make"}});
  CHECK(apply_rename("jobs create; versions create", phrase) == "jobs make; versions build");

  const RenameMap g(std::vector<RenameMap::Entry>{{"gcloud", "llmcloud"}});
  CHECK(apply_rename("gcloud-beta xgcloud gcloud_x /gcloud/ (gcloud)", g) ==
        "gcloud-beta xgcloud gcloud_x /llmcloud/ (llmcloud)");
}

TEST_CASE("rename map validation and digest") {
  CHECK(kind_of([] { RenameMap({{"a", "b"}, {"a", "c"}}); }) == "InvalidRenameMap");
  CHECK(kind_of([] { RenameMap(std::vector<RenameMap::Entry>{{"", "b"}}); }) == "InvalidRenameMap");
  CHECK(RenameMap({{"a", "b"}, {"a", "b"}}).entries().size() == 1);
  const RenameMap m({{"ab", "x"}, {"abc", "y"}, {"cd", "z"}});
  CHECK(m.application_order()[0].first == "abc");
  CHECK(m.application_order()[1].first == "ab");
  CHECK(m.application_order()[2].first == "cd");
  CHECK(m.digest() == RenameMap({{"ab", "x"}, {"abc", "y"}, {"cd", "z"}}).digest());
  CHECK(m.digest() != RenameMap({{"abc", "y"}, {"ab", "x"}, {"cd", "z"}}).digest());
  CHECK(kind_of([] { rename_map_from_json(nlohmann::json::object()); }) == "InvalidRenameMap");
}

TEST_CASE("check_leakage reports offsets in order") {
  const auto v = check_leakage("gsutil cp; gcloud-x; run gcloud", kForbidden);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == LeakageViolation{"gsutil", 0});
  CHECK(v[1] == LeakageViolation{"gcloud", 25});
}

TEST_CASE("reference tasks forge to the renamed commands") {
  const std::string data = DOCPLAN_DATA_DIR;
  const RenameMap map = read_rename_map(data + "/gcp/rename_map.json");
  const ToolRegistry raw = ingest_raw_corpus(data + "/gcp/raw");
  const SourceTasks source = read_source_tasks(data + "/gcp/reference_tasks.json");
  const ForgeResult result = build_benchmark(source, map, raw);
  std::ifstream in(data + "/gcp/reference_expected.json");
  const nlohmann::json expected = nlohmann::json::parse(in);
  REQUIRE(result.benchmark.tasks.size() == 5);
  for (const BenchmarkTask& t : result.benchmark.tasks) {
    CHECK(nlohmann::json(t.gold_plan.lines) == expected.at(t.task_id));
  }
  CHECK(scan_benchmark_leakage(result.benchmark, result.registry, kForbidden).empty());
  CHECK(result.registry.contains("llmcloud scheduler jobs make http"));
  CHECK(result.registry.contains("llmcloud ai-platform versions create"));
  CHECK(result.registry.lookup("llmutil cp").signature == "llmutil cp SRC_URL DST_URL");
  CHECK(result.benchmark.metadata.rename_map_digest == map.digest());
}

TEST_CASE("raw corpus ingestion") {
  const ToolRegistry raw = ingest_raw_corpus(std::string(DOCPLAN_DATA_DIR) + "/gcp/raw");
  REQUIRE(raw.size() == 30);
  CHECK(raw.tools().front().tool_id == "gcloud ai-platform versions create");
  const ToolSpec& t = raw.lookup("gcloud config set");
  CHECK(t.signature == "gcloud config set SECTION/PROPERTY VALUE");
  CHECK(t.doc_text.find("<") == std::string::npos);
  CHECK(t.doc_text.find("dataLayer") == std::string::npos);
}

TEST_CASE("forge errors") {
  ToolRegistry raw;
  raw.register_tool({"gcloud run deploy", "gcloud run deploy", "gcloud run deploy SERVICE", "Deploys.", {}});
  const RenameMap map(std::vector<RenameMap::Entry>{{"gcloud", "llmcloud"}});
  SourceTasks src;
  src.tasks = {{"t1", "q", {"gcloud run deploy a", "gcloud run deploy b"}}};

  SourceTasks bad_lead = src;
  bad_lead.tasks[0].gold_plan[1] = "kubectl apply";
  CHECK(kind_of([&] { build_benchmark(bad_lead, map, raw); }) == "InvalidGoldPlan");

  SourceTasks too_short = src;
  too_short.tasks[0].gold_plan.pop_back();
  CHECK(kind_of([&] { build_benchmark(too_short, map, raw); }) == "InvalidGoldPlan");

  SourceTasks dup = src;
  dup.tasks.push_back(dup.tasks[0]);
  CHECK(kind_of([&] { build_benchmark(dup, map, raw); }) == "DuplicateTaskId");

  SourceTasks leak = src;
  leak.tasks[0].question = "copy with gsutil first";
  try {
    build_benchmark(leak, map, raw);
    FAIL("expected leakage");
  } catch (const Error& e) {
    CHECK(e.kind() == "LeakageDetected");
    CHECK(e.details().dump().find("gsutil") != std::string::npos);
  }
}

TEST_CASE("benchmark json round trip") {
  Benchmark b;
  b.tasks.push_back({"t", "q?", plan_from_lines({"a b", "c"})});
  b.demo_pool = {{"i", "a b"}};
  b.metadata = {"src", "abc", 9};
  const Benchmark back = benchmark_from_json(to_json(b));
  CHECK(to_json(back) == to_json(b));
}

TEST_CASE("forged benchmarks never leak source vocabulary") {
  // Randomized corpora: tool ids, docs, questions, plans and demos all seeded
  // with forbidden tokens in assorted punctuation contexts.
  const char* contexts[] = {"{}", "({})", "/{}/", "{}.", "\"{}\"", "{}-beta", "x{}", "{}_y", "<{}>", "{}:"};
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    std::mt19937_64 rng(seed);
    auto w = [&] { return oracle::word(rng); };
    auto coin = [&] { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
    auto mention = [&] {
      std::string ctx = contexts[std::uniform_int_distribution<std::size_t>(0, std::size(contexts) - 1)(rng)];
      const std::string tok = coin() ? "gcloud" : "gsutil";
      return ctx.replace(ctx.find("{}"), 2, tok);
    };
    auto sentence = [&](int n) {
      std::string s;
      for (int i = 0; i < n; ++i) s += (i ? " " : "") + (std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? mention() : w());
      return s;
    };

    std::vector<RenameMap::Entry> entries{{"gcloud", "llm" + w()}, {"gsutil", "llmu" + w()}};
    for (int i = std::uniform_int_distribution<int>(0, 4)(rng); i > 0; --i) entries.emplace_back(w(), w() + "z");
    std::vector<RenameMap::Entry> clean;
    std::set<std::string> sources;
    for (auto& e : entries) {
      if (sources.insert(e.first).second) clean.push_back(e);
    }
    const RenameMap map(clean);

    ToolRegistry raw;
    std::vector<std::string> ids;
    for (int i = std::uniform_int_distribution<int>(2, 6)(rng); i > 0; --i) {
      std::string id = std::string(coin() ? "gcloud" : "gsutil") + " " + w() + " " + w();
      if (raw.contains(id)) continue;
      raw.register_tool({id, id, id + " ARG", sentence(30), {{sentence(5), id + " 1"}}});
      ids.push_back(id);
    }
    SourceTasks src;
    for (int t = 0; t < 4; ++t) {
      SourceTask task{"t" + std::to_string(t), sentence(12), {}};
      for (int l = std::uniform_int_distribution<int>(2, 4)(rng); l > 0; --l) {
        const std::string& id = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
        task.gold_plan.push_back(id + " " + w() + " --flag=" + w());
      }
      src.tasks.push_back(task);
    }
    for (int d = 0; d < 3; ++d) src.demo_pool.push_back({sentence(8), ids[0] + " " + sentence(3)});

    const ForgeResult result = build_benchmark(src, map, raw);
    CHECK(scan_benchmark_leakage(result.benchmark, result.registry, kForbidden).empty());

    std::vector<std::string> texts;
    for (const ToolSpec& t : result.registry.tools()) {
      texts.insert(texts.end(), {t.tool_id, t.name, t.signature, t.doc_text});
      for (const auto& d : t.demo_pool) texts.insert(texts.end(), {d.instruction, d.plan});
    }
    for (const BenchmarkTask& t : result.benchmark.tasks) {
      texts.push_back(t.question);
      texts.push_back(t.gold_plan.to_text());
    }
    for (const auto& d : result.benchmark.demo_pool) texts.insert(texts.end(), {d.instruction, d.plan});
    for (const std::string& s : texts) {
      CHECK(naive_hits(s, "gcloud") == 0);
      CHECK(naive_hits(s, "gsutil") == 0);
    }

    // Without the gsutil entry the same corpus must be refused whenever it
    // mentions gsutil at all.
    std::vector<RenameMap::Entry> partial;
    for (const auto& e : clean) {
      if (e.first != "gsutil") partial.push_back(e);
    }
    bool mentions = false;
    for (const ToolSpec& t : raw.tools()) mentions |= naive_hits(t.tool_id + " " + t.doc_text, "gsutil") > 0;
    if (mentions) {
      CHECK(kind_of([&] { build_benchmark(src, RenameMap(partial), raw); }) == "LeakageDetected");
    }
    ++checked;
  }
  CHECK(checked >= 100);
}
