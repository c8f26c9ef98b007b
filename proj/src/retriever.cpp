#include "docplan/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include "docplan/error.hpp"
#include "docplan/text.hpp"

namespace docplan::retrieval {

namespace {

constexpr std::string_view kFormat = "docplan-tfidf-v1";

Error retrieval_error(std::string kind, const std::string& message) {
  return Error("retriever", std::move(kind), message);
}

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

void normalize(SparseVector& v) {
  double sq = 0.0;
  for (const auto& [_, w] : v) sq += w * w;
  if (sq <= 0.0) return;
  const double norm = std::sqrt(sq);
  for (auto& [_, w] : v) w /= norm;
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return dot;
}

}  // namespace

void RetrievalConfig::validate() const {
  if (top_k < 1) throw retrieval_error("InvalidConfig", "top_k must be >= 1");
  if (doc_word_limit < 1) throw retrieval_error("InvalidConfig", "doc_word_limit must be >= 1");
}

void to_json(nlohmann::json& j, const RetrievalConfig& c) {
  j = {{"top_k", c.top_k}, {"doc_word_limit", c.doc_word_limit}, {"prompt_budget_words", c.prompt_budget_words},
       {"tokenizer", "lower-split-[a-z0-9_-]"}};
}

void from_json(const nlohmann::json& j, RetrievalConfig& c) {
  c.top_k = j.value("top_k", c.top_k);
  c.doc_word_limit = j.value("doc_word_limit", c.doc_word_limit);
  c.prompt_budget_words = j.value("prompt_budget_words", c.prompt_budget_words);
}

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : input) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (is_token_char(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string truncate_words(std::string_view input, std::size_t n) {
  if (n == 0) throw retrieval_error("InvalidArgument", "truncate_words needs n >= 1");
  return text::join_words(text::split_words(input), n);
}

std::size_t word_count(std::string_view input) { return text::split_words(input).size(); }

std::int64_t rank_key(double score) { return std::llround(score / kScoreTieResolution); }

RetrievalIndex RetrievalIndex::build(const std::vector<Document>& docs, RetrievalConfig config) {
  config.validate();
  if (docs.empty()) throw retrieval_error("EmptyCorpus", "cannot index an empty corpus");

  RetrievalIndex index;
  index.config_ = config;

  std::unordered_set<std::string> seen;
  std::vector<std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> df;
  for (const auto& [id, body] : docs) {
    if (!seen.insert(id).second) throw retrieval_error("DuplicateDocId", "duplicate doc id " + id);
    index.doc_ids_.push_back(id);
    auto& tf = counts.emplace_back();
    for (std::string& tok : tokenize(body)) ++tf[std::move(tok)];
    for (const auto& [term, _] : tf) ++df[term];
  }

  // std::map keeps terms sorted, so ids are independent of document order.
  const double n_docs = static_cast<double>(docs.size());
  for (const auto& [term, freq] : df) {
    index.terms_.push_back(term);
    index.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(freq))) + 1.0);
  }
  index.rebuild_lookup();

  for (const auto& tf : counts) {
    SparseVector v;
    v.reserve(tf.size());
    for (const auto& [term, count] : tf) {
      const std::uint32_t id = index.term_ids_.at(term);
      v.emplace_back(id, static_cast<double>(count) * index.idf_[id]);
    }
    normalize(v);
    index.vectors_.push_back(std::move(v));
  }
  return index;
}

void RetrievalIndex::rebuild_lookup() {
  term_ids_.clear();
  for (std::uint32_t i = 0; i < terms_.size(); ++i) term_ids_.emplace(terms_[i], i);
}

std::int64_t RetrievalIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  return it == term_ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseVector RetrievalIndex::vectorize(std::string_view input) const {
  std::map<std::uint32_t, std::size_t> tf;
  for (const std::string& tok : tokenize(input)) {
    if (auto it = term_ids_.find(tok); it != term_ids_.end()) ++tf[it->second];
  }
  SparseVector v;
  for (const auto& [id, count] : tf) v.emplace_back(id, static_cast<double>(count) * idf_[id]);
  normalize(v);
  return v;
}

std::vector<ScoredDoc> RetrievalIndex::query(std::string_view question, std::size_t k) const {
  if (k < 1) throw retrieval_error("InvalidArgument", "k must be >= 1");
  const SparseVector q = vectorize(question);
  if (q.empty()) return {};

  struct Hit {
    std::size_t doc;
    double score;
    std::int64_t key;
  };
  std::vector<Hit> hits;
  for (std::size_t d = 0; d < vectors_.size(); ++d) {
    const double score = std::min(1.0, sparse_dot(q, vectors_[d]));
    if (score > 0.0) hits.push_back({d, score, rank_key(score)});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.key > b.key; });
  if (hits.size() > k) hits.resize(k);

  std::vector<ScoredDoc> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) out.push_back({doc_ids_[h.doc], h.score});
  return out;
}

nlohmann::json RetrievalIndex::to_json() const {
  nlohmann::json docs = nlohmann::json::array();
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& [id, w] : vectors_[d]) weights.push_back({id, w});
    docs.push_back({{"id", doc_ids_[d]}, {"weights", std::move(weights)}});
  }
  return {{"format", kFormat}, {"config", config_}, {"terms", terms_}, {"idf", idf_}, {"docs", std::move(docs)}};
}

RetrievalIndex RetrievalIndex::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw retrieval_error("InvalidIndex", "unsupported index format");
    }
    RetrievalIndex index;
    index.config_ = j.at("config").get<RetrievalConfig>();
    j.at("terms").get_to(index.terms_);
    j.at("idf").get_to(index.idf_);
    if (index.terms_.size() != index.idf_.size()) {
      throw retrieval_error("InvalidIndex", "terms and idf lengths differ");
    }
    for (const auto& doc : j.at("docs")) {
      index.doc_ids_.push_back(doc.at("id").get<std::string>());
      SparseVector v;
      for (const auto& pair : doc.at("weights")) {
        const auto id = pair.at(0).get<std::uint32_t>();
        if (id >= index.terms_.size()) throw retrieval_error("InvalidIndex", "term id out of range");
        v.emplace_back(id, pair.at(1).get<double>());
      }
      index.vectors_.push_back(std::move(v));
    }
    index.rebuild_lookup();
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw retrieval_error("InvalidIndex", std::string("malformed index: ") + e.what());
  }
}

void RetrievalIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw retrieval_error("IoError", "cannot write index " + path.string());
  out << to_json().dump() << '\n';
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw retrieval_error("IoError", "cannot open index " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw retrieval_error("InvalidIndex", std::string("malformed index: ") + e.what());
  }
}

}  // namespace docplan::retrieval
