#include "uncnet/dates.hpp"

#include <charconv>
#include <cstdio>

#include "uncnet/errors.hpp"

namespace uncnet {
namespace {

// Howard Hinnant's civil-date algorithms.
std::int32_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
      static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = yr + (m <= 2);
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("bad integer field '" + std::string(s) + "'");
  return v;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > 31)
    throw InputError("invalid calendar date component");
  return Date(days_from_civil(year, month, day));
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw InputError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
  const int y = parse_int(text.substr(0, 4));
  const int m = parse_int(text.substr(5, 2));
  const int d = parse_int(text.substr(8, 2));
  Date out = from_ymd(y, m, d);
  if (out.year() != y || out.month() != m || out.day() != d)
    throw InputError("nonexistent calendar date '" + std::string(text) + "'");
  return out;
}

int Date::year() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  return y;
}

int Date::month() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  return m;
}

int Date::day() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  return d;
}

int Date::weekday() const {
  // 1970-01-01 was a Thursday (=3 with Monday=0).
  std::int32_t w = (days_ + 3) % 7;
  return w < 0 ? w + 7 : w;
}

std::int32_t Date::month_index() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  return y * 12 + (m - 1);
}

std::int32_t Date::quarter_index() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  return y * 4 + (m - 1) / 3;
}

std::string Date::to_string() const {
  int y, m, d;
  civil_from_days(days_, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::string month_index_to_string(std::int32_t idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", idx / 12, idx % 12 + 1);
  return buf;
}

std::string quarter_index_to_string(std::int32_t idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-Q%d", idx / 4, idx % 4 + 1);
  return buf;
}

std::int32_t parse_month_index(std::string_view text) {
  if (text.size() != 7 || text[4] != '-')
    throw InputError("expected ISO month YYYY-MM, got '" + std::string(text) + "'");
  const int y = parse_int(text.substr(0, 4));
  const int m = parse_int(text.substr(5, 2));
  if (m < 1 || m > 12)
    throw InputError("month out of range in '" + std::string(text) + "'");
  return y * 12 + (m - 1);
}

std::int32_t parse_quarter_index(std::string_view text) {
  if (text.size() != 7 || text[4] != '-' || text[5] != 'Q')
    throw InputError("expected quarter YYYY-Qn, got '" + std::string(text) + "'");
  const int y = parse_int(text.substr(0, 4));
  const int q = parse_int(text.substr(6, 1));
  if (q < 1 || q > 4)
    throw InputError("quarter out of range in '" + std::string(text) + "'");
  return y * 4 + (q - 1);
}

}  // namespace uncnet
