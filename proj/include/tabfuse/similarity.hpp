#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabfuse {

enum class StringMetric { levenshtein_sim, jaro_winkler, jaccard_token, cosine_trigram };

std::string to_string(StringMetric m);

/// 1 - edit_distance / max(len). Empty vs empty -> 1, empty vs non-empty -> 0.
double levenshtein_similarity(std::string_view a, std::string_view b);

size_t levenshtein_distance(std::string_view a, std::string_view b);

double jaro_similarity(std::string_view a, std::string_view b);

/// Standard Jaro-Winkler, prefix scale 0.1, prefix length capped at 4.
double jaro_winkler(std::string_view a, std::string_view b);

/// Jaccard over whitespace tokens (as sets).
double jaccard_tokens(std::string_view a, std::string_view b);

double jaccard_sets(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Cosine over character-trigram term-frequency vectors.
double cosine_trigram(std::string_view a, std::string_view b);

double string_similarity(std::string_view a, std::string_view b, StringMetric metric);

/// Monge-Elkan: mean over tokens of A of the best inner similarity against
/// tokens of B. Not symmetric. Empty token lists: both empty -> 1, one -> 0.
double monge_elkan(const std::vector<std::string>& a_tokens,
                   const std::vector<std::string>& b_tokens, StringMetric inner);

}  // namespace tabfuse
