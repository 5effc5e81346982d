#include "tabfuse/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "tabfuse/text.hpp"

namespace tabfuse {

std::int64_t Date::to_days() const {
  // Howard Hinnant's days_from_civil algorithm.
  std::int64_t y = year;
  const int m = month;
  const int d = day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string Date::to_iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string format_double(double d) {
  if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", d);
    return buf;
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

std::string value_to_string(const Value& v) {
  switch (v.index()) {
    case 0:
      return "";
    case 1:
      return std::get<std::string>(v);
    case 2:
      return format_double(std::get<double>(v));
    case 3:
      return std::get<Date>(v).to_iso();
    case 4:
      return join(std::get<ListValue>(v), "|");
  }
  return "";
}

bool value_equal(const Value& a, const Value& b) { return a == b; }

}  // namespace tabfuse
