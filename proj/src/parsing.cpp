#include "tabfuse/parsing.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "tabfuse/text.hpp"

namespace tabfuse {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::optional<double> scale_for_word(std::string_view w) {
  std::string s = to_lower(w);
  // currency codes glued to a scale prefix, e.g. "meur", "musd"
  if (s.size() == 4 && (s.substr(1) == "eur" || s.substr(1) == "usd" || s.substr(1) == "gbp")) {
    s = s.substr(0, 1);
  }
  if (s == "k" || s == "thousand" || s == "thousands") return 1e3;
  if (s == "m" || s == "mm" || s == "mn" || s == "mio" || s == "million" || s == "millions")
    return 1e6;
  if (s == "b" || s == "bn" || s == "billion" || s == "billions") return 1e9;
  if (s == "trillion" || s == "tn") return 1e12;
  return std::nullopt;
}

bool is_currency_token(std::string_view w) {
  std::string s = to_lower(w);
  return s == "usd" || s == "eur" || s == "gbp" || s == "jpy" || s == "chf" ||
         s == "dollar" || s == "dollars" || s == "euro" || s == "euros";
}

int month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kNames = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  std::string s = to_lower(name);
  for (int i = 0; i < 12; ++i) {
    const auto& full = kNames[static_cast<size_t>(i)];
    if (s == full || (s.size() == 3 && full.substr(0, 3) == s)) return i + 1;
  }
  return 0;
}

bool valid_ymd(int y, int m, int d) {
  if (y < 1 || y > 9999 || m < 1 || m > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int md = kDays[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) md = 29;
  return d <= md;
}

std::optional<int> to_int(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (!is_digit(c)) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

bool looks_like_year(std::string_view raw) {
  std::string s = trim(raw);
  auto v = to_int(s);
  return v && *v >= 1000 && *v <= 2999;
}

std::optional<double> parse_number_scaled(std::string_view raw, const NumberFormat& fmt) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;

  // strip currency symbols anywhere, percent at the end
  std::string cleaned;
  cleaned.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    unsigned char c = s[i];
    if (c == '$') continue;
    if (c == 0xE2 && i + 2 < s.size()) {  // euro sign UTF-8 E2 82 AC
      if (static_cast<unsigned char>(s[i + 1]) == 0x82 &&
          static_cast<unsigned char>(s[i + 2]) == 0xAC) {
        i += 2;
        continue;
      }
    }
    if (c == 0xC2 && i + 1 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0xA3) {  // pound sign
      ++i;
      continue;
    }
    cleaned.push_back(static_cast<char>(c));
  }

  // split numeric body from trailing word tokens ("12.5 million", "3.4MEUR")
  size_t i = 0;
  std::string body;
  bool negative = false;
  while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
  if (i < cleaned.size() && (cleaned[i] == '-' || cleaned[i] == '+')) {
    negative = cleaned[i] == '-';
    ++i;
  }
  bool saw_digit = false;
  while (i < cleaned.size()) {
    char c = cleaned[i];
    if (is_digit(c)) {
      saw_digit = true;
      body.push_back(c);
      ++i;
    } else if (c == fmt.decimal_separator || c == fmt.thousands_separator) {
      body.push_back(c);
      ++i;
    } else {
      break;
    }
  }
  if (!saw_digit) return std::nullopt;

  double scale = 1.0;
  bool scaled = false;
  // remainder may be a scale word, a currency token, or a percent sign
  std::string rest = trim(cleaned.substr(i));
  if (!rest.empty()) {
    if (rest == "%") {
      return std::nullopt;  // percentages are not plain numbers
    }
    for (const auto& tok : whitespace_tokens(rest)) {
      if (auto sc = scale_for_word(tok)) {
        if (scaled) return std::nullopt;
        scale = *sc;
        scaled = true;
      } else if (is_currency_token(tok)) {
        continue;
      } else {
        return std::nullopt;
      }
    }
  }

  // resolve separators in the body
  std::string digits;
  digits.reserve(body.size());
  bool saw_decimal = false;
  const size_t last_thousand_ok = body.size();
  (void)last_thousand_ok;
  for (size_t j = 0; j < body.size(); ++j) {
    char c = body[j];
    if (c == fmt.decimal_separator && fmt.decimal_separator != fmt.thousands_separator) {
      if (saw_decimal) return std::nullopt;
      saw_decimal = true;
      digits.push_back('.');
    } else if (c == fmt.thousands_separator) {
      if (saw_decimal) return std::nullopt;  // thousands after decimal point
      // group must be exactly 3 digits long
      size_t g = 0;
      while (j + 1 + g < body.size() && is_digit(body[j + 1 + g])) ++g;
      size_t group_end = j + 1 + g;
      bool ends_number = group_end >= body.size() ||
                         body[group_end] == fmt.decimal_separator ||
                         body[group_end] == fmt.thousands_separator;
      if (g < 3 || !ends_number) return std::nullopt;
    } else {
      digits.push_back(c);
    }
  }
  if (digits.empty() || digits == ".") return std::nullopt;

  double v = 0.0;
  auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) return std::nullopt;
  if (negative) v = -v;
  return v * scale;
}

std::optional<Date> parse_date(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;

  // ISO and Y/M/D variants: 2001-09-14, 2001/09/14, 2001.09.14
  {
    auto try_sep = [&](char sep) -> std::optional<Date> {
      auto parts = split(s, sep);
      if (parts.size() != 3) return std::nullopt;
      auto a = to_int(trim(parts[0])), b = to_int(trim(parts[1])), c = to_int(trim(parts[2]));
      if (!a || !b || !c) return std::nullopt;
      // four-digit leading -> Y-M-D; four-digit trailing -> D-M-Y or M/D/Y
      if (parts[0].size() == 4) {
        if (valid_ymd(*a, *b, *c)) return Date{*a, *b, *c};
        return std::nullopt;
      }
      if (parts[2].size() == 4) {
        if (sep == '/') {
          // US order first; fall back to D/M/Y when month is impossible
          if (valid_ymd(*c, *a, *b)) return Date{*c, *a, *b};
        }
        if (valid_ymd(*c, *b, *a)) return Date{*c, *b, *a};
        return std::nullopt;
      }
      return std::nullopt;
    };
    for (char sep : {'-', '/', '.'}) {
      if (s.find(sep) != std::string::npos) {
        if (auto d = try_sep(sep)) return d;
      }
    }
  }

  // "September 14, 2001" / "14 September 2001"
  {
    std::string cleaned;
    for (char c : s)
      cleaned.push_back(c == ',' ? ' ' : c);
    auto toks = whitespace_tokens(cleaned);
    if (toks.size() == 3) {
      if (int m = month_from_name(toks[0]); m != 0) {
        auto d = to_int(toks[1]);
        auto y = to_int(toks[2]);
        if (d && y && valid_ymd(*y, m, *d)) return Date{*y, m, *d};
      }
      if (int m = month_from_name(toks[1]); m != 0) {
        auto d = to_int(toks[0]);
        auto y = to_int(toks[2]);
        if (d && y && valid_ymd(*y, m, *d)) return Date{*y, m, *d};
      }
    }
    if (toks.size() == 2) {  // "September 2001"
      if (int m = month_from_name(toks[0]); m != 0) {
        auto y = to_int(toks[1]);
        if (y && valid_ymd(*y, m, 1)) return Date{*y, m, 1};
      }
    }
  }

  if (looks_like_year(s)) {
    auto y = to_int(s);
    return Date{*y, 1, 1};
  }
  return std::nullopt;
}

std::optional<double> parse_duration_minutes(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;

  // colon forms: H:MM:SS or MM:SS
  if (s.find(':') != std::string::npos) {
    auto parts = split(s, ':');
    if (parts.size() == 2) {
      auto m = to_int(trim(parts[0]));
      auto sec = to_int(trim(parts[1]));
      if (m && sec && *sec < 60) return *m + *sec / 60.0;
      return std::nullopt;
    }
    if (parts.size() == 3) {
      auto h = to_int(trim(parts[0]));
      auto m = to_int(trim(parts[1]));
      auto sec = to_int(trim(parts[2]));
      if (h && m && sec && *m < 60 && *sec < 60) return *h * 60.0 + *m + *sec / 60.0;
      return std::nullopt;
    }
    return std::nullopt;
  }

  // unit forms: "45 min", "2 h", "1h23m", "90 seconds"
  double total = 0.0;
  bool any_unit = false;
  std::string num;
  size_t i = 0;
  while (i <= s.size()) {
    char c = i < s.size() ? s[i] : '\0';
    if (is_digit(c) || c == '.') {
      num.push_back(c);
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '\0') break;
    // read a unit word
    std::string unit;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) {
      unit.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
      ++i;
    }
    if (unit.empty() || num.empty()) return std::nullopt;
    double v = std::strtod(num.c_str(), nullptr);
    num.clear();
    if (unit == "h" || unit == "hr" || unit == "hrs" || unit == "hour" || unit == "hours") {
      total += v * 60.0;
    } else if (unit == "m" || unit == "min" || unit == "mins" || unit == "minute" ||
               unit == "minutes") {
      total += v;
    } else if (unit == "s" || unit == "sec" || unit == "secs" || unit == "second" ||
               unit == "seconds") {
      total += v / 60.0;
    } else {
      return std::nullopt;
    }
    any_unit = true;
  }
  if (any_unit) {
    if (!num.empty()) return std::nullopt;  // trailing bare number after units
    return total;
  }
  // bare number: taken as minutes as-is
  if (!num.empty()) {
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end && *end == '\0') return v;
  }
  return std::nullopt;
}

}  // namespace tabfuse
