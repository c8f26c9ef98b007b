#include <doctest.h>

#include <filesystem>
#include <random>

#include "docplan/error.hpp"
#include "docplan/retriever.hpp"
#include "oracles.hpp"

using namespace docplan;
using namespace docplan::retrieval;

namespace {

std::string kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

std::vector<RetrievalIndex::Document> random_corpus(std::mt19937_64& rng) {
  std::vector<RetrievalIndex::Document> docs;
  const int n = std::uniform_int_distribution<int>(1, 50)(rng);
  for (int d = 0; d < n; ++d) {
    std::string body;
    const int len = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < len; ++i) {
      std::string w = oracle::word(rng, 60);
      if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
      body += w + (i % 7 == 6 ? ", " : " ");
    }
    // Occasional exact duplicates exercise the tie rule.
    if (d > 0 && std::uniform_int_distribution<int>(0, 9)(rng) == 0) body = docs.back().second;
    docs.emplace_back("doc" + std::to_string(d), body);
  }
  return docs;
}

}  // namespace

TEST_CASE("defaults") {
  const RetrievalConfig c;
  CHECK(c.top_k == 10);
  CHECK(c.doc_word_limit == 600);
  CHECK(c.prompt_budget_words == 0);
  RetrievalConfig bad;
  bad.top_k = 0;
  CHECK(kind_of([&] { bad.validate(); }) == "InvalidConfig");
}

TEST_CASE("tokenizer") {
  CHECK(tokenize("Deploy --port=8080 my_svc, NOW!") ==
        std::vector<std::string>{"deploy", "--port", "8080", "my_svc", "now"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("three document hand example") {
  const auto index = RetrievalIndex::build({{"d1", "cat dog"}, {"d2", "dog fish"}, {"d3", "bird"}});
  const auto hits = index.query("dog", 10);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].doc_id == "d1");
  CHECK(hits[1].doc_id == "d2");
  CHECK(hits[0].score == doctest::Approx(0.6053485081062916).epsilon(1e-12));
  CHECK(hits[1].score == doctest::Approx(0.6053485081062916).epsilon(1e-12));

  const auto both = index.query("cat dog", 10);
  REQUIRE(both.size() == 2);
  CHECK(both[0].doc_id == "d1");
  CHECK(both[0].score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(both[1].score == doctest::Approx(0.366446816266513).epsilon(1e-12));

  CHECK(index.query("unknown words", 10).empty());
  CHECK(index.query("dog", 1).size() == 1);
}

TEST_CASE("index errors") {
  CHECK(kind_of([] { RetrievalIndex::build({}); }) == "EmptyCorpus");
  CHECK(kind_of([] { RetrievalIndex::build({{"a", "x"}, {"a", "y"}}); }) == "DuplicateDocId");
}

TEST_CASE("query matches dense cosine oracle on random corpora") {
  std::mt19937_64 rng(42);
  for (int c = 0; c < 200; ++c) {
    const auto docs = random_corpus(rng);
    const auto index = RetrievalIndex::build(docs);
    for (int q = 0; q < 3; ++q) {
      std::string question;
      for (int i = std::uniform_int_distribution<int>(1, 6)(rng); i > 0; --i) question += oracle::word(rng, 60) + " ";
      const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
      const auto got = index.query(question, k);
      const auto want = oracle::dense_cosine(docs, question, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].doc_id == want[i].id);
        CHECK(std::abs(got[i].score - want[i].score) < 1e-9);
      }
    }
  }
}

TEST_CASE("truncation keeps exactly min(n, words) words") {
  CHECK(kind_of([] { truncate_words("a b", 0); }) == "InvalidArgument");
  CHECK(truncate_words("  a\tb\n c ", 2) == "a b");
  std::mt19937_64 rng(3);
  const char* seps[] = {" ", "  ", "\t", "\n", " \r\n"};
  for (int i = 0; i < 1000; ++i) {
    std::string s = std::uniform_int_distribution<int>(0, 1)(rng) ? " " : "";
    const int words = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int w = 0; w < words; ++w) s += oracle::word(rng) + seps[std::uniform_int_distribution<int>(0, 4)(rng)];
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const std::string out = truncate_words(s, n);
    CHECK(word_count(out) == std::min<std::size_t>(n, static_cast<std::size_t>(words)));
    CHECK(word_count(s) == static_cast<std::size_t>(words));
  }
}

TEST_CASE("serialization round trip preserves rankings") {
  std::mt19937_64 rng(5);
  const auto docs = random_corpus(rng);
  RetrievalConfig cfg;
  cfg.top_k = 4;
  cfg.doc_word_limit = 50;
  const auto index = RetrievalIndex::build(docs, cfg);
  const auto path = std::filesystem::temp_directory_path() / "docplan_index_roundtrip.json";
  index.save(path);
  const auto back = RetrievalIndex::load(path);
  std::filesystem::remove(path);
  CHECK(back.config() == cfg);
  CHECK(back.doc_ids() == index.doc_ids());
  CHECK(back.to_json() == index.to_json());
  const std::string q = docs[0].second;
  CHECK(back.query(q) == index.query(q));
  CHECK(kind_of([] { RetrievalIndex::from_json({{"format", "other"}}); }) != "");
}
