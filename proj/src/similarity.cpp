#include "tabfuse/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "tabfuse/common.hpp"
#include "tabfuse/text.hpp"

namespace tabfuse {

std::string to_string(StringMetric m) {
  switch (m) {
    case StringMetric::levenshtein_sim: return "levenshtein-sim";
    case StringMetric::jaro_winkler: return "jaro-winkler";
    case StringMetric::jaccard_token: return "jaccard-token";
    case StringMetric::cosine_trigram: return "cosine-tfidf-char3";
  }
  return "levenshtein-sim";
}

size_t levenshtein_distance(std::string_view a, std::string_view b) {
  const size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), size_t{0});
  for (size_t i = 0; i < n; ++i) {
    cur[0] = i + 1;
    for (size_t j = 0; j < m; ++j) {
      const size_t cost = a[i] == b[j] ? 0 : 1;
      cur[j + 1] = std::min({cur[j] + 1, prev[j + 1] + 1, prev[j] + cost});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  const size_t maxlen = std::max(a.size(), b.size());
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(maxlen);
}

double jaro_similarity(std::string_view a, std::string_view b) {
  const size_t n = a.size(), m = b.size();
  if (n == 0 && m == 0) return 1.0;
  if (n == 0 || m == 0) return 0.0;
  const size_t window = std::max<size_t>(1, std::max(n, m) / 2) - 1;
  std::vector<bool> a_matched(n, false), b_matched(m, false);
  size_t matches = 0;
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i > window ? i - window : 0;
    const size_t hi = std::min(m, i + window + 1);
    for (size_t j = lo; j < hi; ++j) {
      if (b_matched[j] || a[i] != b[j]) continue;
      a_matched[i] = b_matched[j] = true;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;
  size_t transpositions = 0;
  size_t j = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[j]) ++j;
    if (a[i] != b[j]) ++transpositions;
    ++j;
  }
  const double mm = static_cast<double>(matches);
  return (mm / static_cast<double>(n) + mm / static_cast<double>(m) +
          (mm - static_cast<double>(transpositions) / 2.0) / mm) /
         3.0;
}

double jaro_winkler(std::string_view a, std::string_view b) {
  const double jaro = jaro_similarity(a, b);
  size_t prefix = 0;
  const size_t limit = std::min({a.size(), b.size(), size_t{4}});
  while (prefix < limit && a[prefix] == b[prefix]) ++prefix;
  return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

double jaccard_sets(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  size_t inter = 0;
  for (const auto& t : sa)
    if (sb.count(t)) ++inter;
  const size_t uni = sa.size() + sb.size() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_tokens(std::string_view a, std::string_view b) {
  return jaccard_sets(whitespace_tokens(a), whitespace_tokens(b));
}

namespace {

std::unordered_map<std::uint64_t, double> trigram_counts(std::string_view s) {
  std::unordered_map<std::uint64_t, double> tf;
  if (s.size() < 3) {
    if (!s.empty()) tf[fnv1a64(s)] += 1.0;
    return tf;
  }
  for (size_t i = 0; i + 3 <= s.size(); ++i) tf[fnv1a64(s.substr(i, 3))] += 1.0;
  return tf;
}

}  // namespace

double cosine_trigram(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  auto ta = trigram_counts(a);
  auto tb = trigram_counts(b);
  if (ta.empty() || tb.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : ta) {
    na += v * v;
    auto it = tb.find(k);
    if (it != tb.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : tb) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double string_similarity(std::string_view a, std::string_view b, StringMetric metric) {
  switch (metric) {
    case StringMetric::levenshtein_sim: return levenshtein_similarity(a, b);
    case StringMetric::jaro_winkler: return jaro_winkler(a, b);
    case StringMetric::jaccard_token: return jaccard_tokens(a, b);
    case StringMetric::cosine_trigram: return cosine_trigram(a, b);
  }
  return 0.0;
}

double monge_elkan(const std::vector<std::string>& a_tokens,
                   const std::vector<std::string>& b_tokens, StringMetric inner) {
  if (a_tokens.empty() && b_tokens.empty()) return 1.0;
  if (a_tokens.empty() || b_tokens.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& a : a_tokens) {
    double best = 0.0;
    for (const auto& b : b_tokens) best = std::max(best, string_similarity(a, b, inner));
    sum += best;
  }
  return sum / static_cast<double>(a_tokens.size());
}

}  // namespace tabfuse
