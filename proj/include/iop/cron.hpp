#pragma once

// Five-field cron schedules (minute hour day-of-month month day-of-week) with
// `*`, lists, ranges and steps. Matching is at minute granularity in UTC.

#include <bitset>
#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iop {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;
using MinutePoint = std::chrono::sys_time<std::chrono::minutes>;

class CronError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CronSchedule {
 public:
  CronSchedule() = default;
  /// Throws CronError on anything but exactly five valid fields.
  static CronSchedule parse(std::string_view expr);

  bool matches(MinutePoint minute) const;
  bool matches(TimePoint t) const { return matches(std::chrono::floor<std::chrono::minutes>(t)); }
  /// First matching minute strictly after `after`, searching up to ~5 years.
  MinutePoint next_after(MinutePoint after) const;

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::bitset<60> minutes_;
  std::bitset<24> hours_;
  std::bitset<32> days_;      // 1..31
  std::bitset<13> months_;    // 1..12
  std::bitset<7> weekdays_;   // 0 = Sunday
  bool any_day_ = true;
  bool any_weekday_ = true;
};

}  // namespace iop
