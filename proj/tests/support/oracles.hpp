#pragma once

// Reference implementations used only by tests. They are written from the
// documented formulas, share no code with the library, and favour clarity
// over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::string> terms(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (keep) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Ranked {
  std::string id;
  double score = 0.0;
};

/// Dense TF-IDF cosine ranking: w = count * (ln((1+N)/(1+df)) + 1), cosine
/// over full-vocabulary vectors, scores equal to 1e-12 resolution tie-broken
/// by corpus position.
inline std::vector<Ranked> dense_cosine(const std::vector<std::pair<std::string, std::string>>& docs,
                                        std::string_view query, std::size_t k) {
  std::map<std::string, std::size_t> vocab;
  std::vector<std::vector<std::string>> doc_terms;
  for (const auto& d : docs) {
    doc_terms.push_back(terms(d.second));
    for (const auto& t : doc_terms.back()) vocab.emplace(t, 0);
  }
  std::size_t next = 0;
  for (auto& [t, id] : vocab) id = next++;
  const std::size_t n = docs.size();
  std::vector<double> df(vocab.size(), 0.0);
  for (const auto& dt : doc_terms) {
    std::set<std::string> uniq(dt.begin(), dt.end());
    for (const auto& t : uniq) df[vocab[t]] += 1.0;
  }
  std::vector<double> idf(vocab.size());
  for (std::size_t i = 0; i < idf.size(); ++i) {
    idf[i] = std::log((1.0 + static_cast<double>(n)) / (1.0 + df[i])) + 1.0;
  }
  auto dense = [&](const std::vector<std::string>& ts) {
    std::vector<double> v(vocab.size(), 0.0);
    for (const auto& t : ts) {
      auto it = vocab.find(t);
      if (it != vocab.end()) v[it->second] += 1.0;
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= idf[i];
    return v;
  };
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const std::vector<double> q = dense(terms(query));
  const double qn = norm(q);
  std::vector<std::pair<std::size_t, double>> scored;
  for (std::size_t d = 0; d < n; ++d) {
    const std::vector<double> v = dense(doc_terms[d]);
    const double vn = norm(v);
    if (qn == 0.0 || vn == 0.0) continue;
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * q[i];
    const double score = std::min(1.0, dot / (vn * qn));
    if (score > 0.0) scored.emplace_back(d, score);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return std::llround(a.second / 1e-12) > std::llround(b.second / 1e-12);
  });
  std::vector<Ranked> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back({docs[scored[i].first].first, scored[i].second});
  return out;
}

inline std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) out.push_back(cur), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline bool placeholder(const std::string& t) {
  if (t.size() < 2 || t[0] < 'A' || t[0] > 'Z') return false;
  for (char c : t) {
    if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

inline bool same_line(const std::string& pred, const std::string& gold, bool wildcard) {
  const auto p = tokens(pred);
  const auto g = tokens(gold);
  if (p.size() != g.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == g[i]) continue;
    if (wildcard && placeholder(g[i])) continue;
    return false;
  }
  return true;
}

/// Size of a maximum one-to-one matching, by exhaustive search over gold
/// subsets (fine for a handful of lines).
inline std::size_t max_matching(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                                bool wildcard) {
  const std::size_t g = gold.size();
  std::vector<int> best(std::size_t{1} << g, -1);
  best[0] = 0;
  for (const auto& p : pred) {
    std::vector<int> next = best;
    for (std::size_t mask = 0; mask < best.size(); ++mask) {
      if (best[mask] < 0) continue;
      for (std::size_t j = 0; j < g; ++j) {
        if ((mask >> j) & 1U) continue;
        if (!same_line(p, gold[j], wildcard)) continue;
        const std::size_t m2 = mask | (std::size_t{1} << j);
        next[m2] = std::max(next[m2], best[mask] + 1);
      }
    }
    best = std::move(next);
  }
  return static_cast<std::size_t>(*std::max_element(best.begin(), best.end()));
}

inline double f1(std::size_t matches, std::size_t n_pred, std::size_t n_gold) {
  if (matches == 0) return 0.0;
  const double p = static_cast<double>(matches) / static_cast<double>(n_pred);
  const double r = static_cast<double>(matches) / static_cast<double>(n_gold);
  return 2.0 * p * r / (p + r);
}

/// Word drawn from a small alphabet so that corpora share terms.
inline std::string word(std::mt19937_64& rng, std::size_t alphabet = 40) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "vu", "ze"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet - 1);
  std::size_t v = pick(rng);
  std::string w = kSyllables[v % 10];
  w += kSyllables[(v / 10) % 10];
  return w;
}

}  // namespace oracle
