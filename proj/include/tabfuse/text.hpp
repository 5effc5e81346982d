#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabfuse {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Split on any whitespace run; no empty tokens.
std::vector<std::string> whitespace_tokens(std::string_view s);

/// Split on a literal delimiter; keeps empty segments.
std::vector<std::string> split(std::string_view s, char delim);

/// Tokenizer for attribute labels: splits on whitespace, '_', '-', '.' and
/// camelCase boundaries, lowercases the result. "criticScore" -> {critic, score}.
std::vector<std::string> label_tokens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Case-folded, punctuation- and whitespace-insensitive form used by the
/// fusion value-equality rule ("PlayStation 4" == "playstation 4").
std::string normalize_for_compare(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace tabfuse
