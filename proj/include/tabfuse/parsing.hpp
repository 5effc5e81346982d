#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tabfuse/value.hpp"

namespace tabfuse {

/// Locale hints for numeric parsing. Defaults are dot-decimal with optional
/// comma thousands separators ("3,400" -> 3400).
struct NumberFormat {
  char decimal_separator = '.';
  char thousands_separator = ',';
};

/// Parses a number with optional currency letters/symbols, locale separators
/// and scale words: thousand/k = 1e3, million/m/mm/meur = 1e6, billion/bn/b = 1e9.
/// "3.2 million" -> 3200000, "$12.5M" -> 12500000.
std::optional<double> parse_number_scaled(std::string_view raw, const NumberFormat& fmt = {});

/// Accepts ISO (2001-09-14), slashed/dotted D-M-Y and M/D/Y, "Month D, YYYY",
/// "D Month YYYY" and bare years (-> Jan 1).
std::optional<Date> parse_date(std::string_view raw);

/// Duration to minutes: "1:02:30" -> 62.5, "61:23" -> 61.38..., "45 min" -> 45,
/// "2 h" -> 120, "1h23m" -> 83. Bare numbers are taken as minutes as-is.
std::optional<double> parse_duration_minutes(std::string_view raw);

/// ISO 3166-1 alpha-2 lookup over an embedded table of official names and
/// common aliases ("United States", "USA", "U.S." -> "US"). Case-insensitive.
std::optional<std::string> country_to_alpha2(std::string_view raw);

/// True when the value looks like a bare year (1000..2999).
bool looks_like_year(std::string_view raw);

}  // namespace tabfuse
