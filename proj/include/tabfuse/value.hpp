#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tabfuse {

struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  /// Days since 1970-01-01 (proleptic Gregorian); used for day-diff features.
  std::int64_t to_days() const;
  std::string to_iso() const;
};

using ListValue = std::vector<std::string>;

/// A cell value. monostate encodes null.
using Value = std::variant<std::monostate, std::string, double, Date, ListValue>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Canonical text form: shortest round-trip for doubles (integral values
/// printed without exponent), ISO dates, '|'-joined lists, "" for null.
std::string value_to_string(const Value& v);

/// Deterministic double formatting shared by value_to_string and reports.
std::string format_double(double d);

bool value_equal(const Value& a, const Value& b);

}  // namespace tabfuse
