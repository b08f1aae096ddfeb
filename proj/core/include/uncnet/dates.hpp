#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace uncnet {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
 public:
  Date() = default;
  static Date from_ymd(int year, int month, int day);
  static Date from_days(std::int32_t days) { return Date(days); }

  /// Parses strict ISO "YYYY-MM-DD". Throws InputError on anything else.
  static Date parse(std::string_view text);

  std::int32_t days_since_epoch() const { return days_; }
  int year() const;
  int month() const;   // 1..12
  int day() const;     // 1..31
  int weekday() const; // 0 = Monday .. 6 = Sunday

  /// Months since year 0, i.e. year*12 + (month-1).
  std::int32_t month_index() const;
  /// Quarters since year 0, i.e. year*4 + (month-1)/3.
  std::int32_t quarter_index() const;

  std::string to_string() const;  // "YYYY-MM-DD"

  Date plus_days(std::int32_t n) const { return Date(days_ + n); }
  std::int32_t operator-(Date other) const { return days_ - other.days_; }
  auto operator<=>(const Date&) const = default;

 private:
  explicit Date(std::int32_t days) : days_(days) {}
  std::int32_t days_ = 0;
};

std::string month_index_to_string(std::int32_t idx);    // "YYYY-MM"
std::string quarter_index_to_string(std::int32_t idx);  // "YYYY-Qn"

/// Parses "YYYY-MM" into a month index; throws InputError otherwise.
std::int32_t parse_month_index(std::string_view text);
/// Parses "YYYY-Qn" into a quarter index; throws InputError otherwise.
std::int32_t parse_quarter_index(std::string_view text);

}  // namespace uncnet
