#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace docplan::retrieval {

struct RetrievalConfig {
  std::size_t top_k = 10;
  /// Per-document truncation: keep the first n words.
  std::size_t doc_word_limit = 600;
  /// Total words allowed across the documentation section; 0 disables it.
  std::size_t prompt_budget_words = 0;

  /// Throws Error{InvalidConfig}.
  void validate() const;
  bool operator==(const RetrievalConfig&) const = default;
};

void to_json(nlohmann::json& j, const RetrievalConfig& c);
void from_json(const nlohmann::json& j, RetrievalConfig& c);

/// Lowercases ASCII letters and splits on every byte outside [a-z0-9_-].
/// No stemming and no stop words; "--port" stays "--port".
std::vector<std::string> tokenize(std::string_view text);

/// First min(n, word count) whitespace-delimited words joined by single
/// spaces. Throws Error{InvalidArgument} when n == 0.
std::string truncate_words(std::string_view text, std::size_t n);

std::size_t word_count(std::string_view text);

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
  bool operator==(const ScoredDoc&) const = default;
};

/// Scores closer than this compare equal when ranking; ties fall back to
/// document insertion order.
inline constexpr double kScoreTieResolution = 1e-12;

/// Ranking key shared by the index and any reference implementation.
std::int64_t rank_key(double score);

/// Immutable TF-IDF index. Weights are raw term count times
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1, and each document vector is
/// L2-normalized (documents without terms keep the zero vector).
class RetrievalIndex {
 public:
  using Document = std::pair<std::string, std::string>;  // (doc_id, text)

  /// Throws Error{EmptyCorpus} or Error{DuplicateDocId}.
  static RetrievalIndex build(const std::vector<Document>& docs, RetrievalConfig config = {});

  /// Cosine-ranked documents with score > 0, at most k of them.
  std::vector<ScoredDoc> query(std::string_view question, std::size_t k) const;
  std::vector<ScoredDoc> query(std::string_view question) const { return query(question, config_.top_k); }

  const RetrievalConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return doc_ids_.size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<std::string>& vocabulary() const noexcept { return terms_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  const SparseVector& doc_vector(std::size_t i) const { return vectors_.at(i); }
  /// Index of a term in vocabulary(), or -1.
  std::int64_t term_id(std::string_view term) const;

  /// Query-side weights under this index's idf, L2-normalized.
  SparseVector vectorize(std::string_view text) const;

  nlohmann::json to_json() const;
  static RetrievalIndex from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RetrievalIndex load(const std::filesystem::path& path);

 private:
  void rebuild_lookup();

  RetrievalConfig config_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<double> idf_;
  std::vector<std::string> doc_ids_;
  std::vector<SparseVector> vectors_;
};

}  // namespace docplan::retrieval
