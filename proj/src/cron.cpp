#include "iop/cron.hpp"

#include <charconv>
#include <sstream>
#include <vector>

namespace iop {

namespace {

int number(std::string_view s, std::string_view field) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw CronError("bad number '" + std::string(s) + "' in " + std::string(field) + " field");
  return v;
}

// Sets bits [lo, hi] of `bits` as described by one comma-separated field.
template <std::size_t N>
bool parse_field(std::string_view text, int lo, int hi, std::string_view name,
                 std::bitset<N>& bits) {
  bool star = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - start);
    auto range = item;
    int step = 1;
    if (const auto slash = item.find('/'); slash != std::string_view::npos) {
      range = item.substr(0, slash);
      step = number(item.substr(slash + 1), name);
      if (step <= 0) throw CronError("step must be positive in " + std::string(name) + " field");
    }
    int first = lo, last = hi;
    if (range == "*") {
      star = star || step == 1;
    } else if (const auto dash = range.find('-'); dash != std::string_view::npos) {
      first = number(range.substr(0, dash), name);
      last = number(range.substr(dash + 1), name);
    } else {
      first = number(range, name);
      last = item.find('/') == std::string_view::npos ? first : hi;
    }
    if (first < lo || last > hi || first > last)
      throw CronError("value out of range in " + std::string(name) + " field: " + std::string(item));
    for (int v = first; v <= last; v += step) bits.set(static_cast<std::size_t>(v));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return star;
}

}  // namespace

CronSchedule CronSchedule::parse(std::string_view expr) {
  std::istringstream in{std::string(expr)};
  std::vector<std::string> fields;
  for (std::string f; in >> f;) fields.push_back(f);
  if (fields.size() != 5)
    throw CronError("cron expression needs 5 fields, got " + std::to_string(fields.size()) +
                    ": '" + std::string(expr) + "'");

  CronSchedule s;
  for (std::size_t i = 0; i < fields.size(); ++i) s.text_ += (i ? " " : "") + fields[i];
  parse_field(fields[0], 0, 59, "minute", s.minutes_);
  parse_field(fields[1], 0, 23, "hour", s.hours_);
  s.any_day_ = parse_field(fields[2], 1, 31, "day-of-month", s.days_);
  parse_field(fields[3], 1, 12, "month", s.months_);
  std::bitset<8> dow;
  s.any_weekday_ = parse_field(fields[4], 0, 7, "day-of-week", dow);
  for (std::size_t d = 0; d < 7; ++d) s.weekdays_[d] = dow[d];
  if (dow[7]) s.weekdays_.set(0);
  return s;
}

bool CronSchedule::matches(MinutePoint minute) const {
  using namespace std::chrono;
  const auto day = floor<days>(minute);
  const hh_mm_ss hms{minute - day};
  if (!minutes_[static_cast<std::size_t>(hms.minutes().count())] ||
      !hours_[static_cast<std::size_t>(hms.hours().count())])
    return false;
  const year_month_day ymd{day};
  if (!months_[static_cast<unsigned>(ymd.month())]) return false;
  const bool dom = days_[static_cast<unsigned>(ymd.day())];
  const bool dow = weekdays_[weekday{day}.c_encoding()];
  // Standard cron: when both day fields are restricted, either may match.
  if (any_day_ && any_weekday_) return true;
  if (any_day_) return dow;
  if (any_weekday_) return dom;
  return dom || dow;
}

MinutePoint CronSchedule::next_after(MinutePoint after) const {
  constexpr auto kHorizon = std::chrono::minutes(60 * 24 * 366 * 5);
  for (auto t = after + std::chrono::minutes(1); t <= after + kHorizon; t += std::chrono::minutes(1))
    if (matches(t)) return t;
  throw CronError("cron expression '" + text_ + "' never fires");
}

}  // namespace iop
