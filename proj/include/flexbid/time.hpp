#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace flexbid {

inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kMinutesPerHour = 60;
inline constexpr int kHoursPerDay = 24;

// Calendar day, counted from 1970-01-01. Timestamps are timezone-naive and
// assumed pre-normalised to a single zone per dataset.
struct Day {
  std::int32_t index{0};

  friend constexpr auto operator<=>(Day, Day) = default;
};

// Minute-resolution timestamp, counted from 1970-01-01T00:00.
struct Minute {
  std::int64_t index{0};

  constexpr Day day() const {
    auto q = index / kMinutesPerDay;
    if (index % kMinutesPerDay < 0) --q;
    return Day{static_cast<std::int32_t>(q)};
  }
  constexpr int minute_of_day() const {
    auto r = index % kMinutesPerDay;
    return static_cast<int>(r < 0 ? r + kMinutesPerDay : r);
  }
  constexpr Minute operator+(std::int64_t m) const { return Minute{index + m}; }
  constexpr Minute operator-(std::int64_t m) const { return Minute{index - m}; }
  constexpr std::int64_t operator-(Minute o) const { return index - o.index; }

  friend constexpr auto operator<=>(Minute, Minute) = default;
};

constexpr Minute start_of(Day d) { return Minute{std::int64_t{d.index} * kMinutesPerDay}; }

inline Day make_day(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  sys_days sd = std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
  return Day{static_cast<std::int32_t>(sd.time_since_epoch().count())};
}

inline std::string format_day(Day d) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{d.index}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string format_minute(Minute m) {
  const int mod = m.minute_of_day();
  char buf[8];
  std::snprintf(buf, sizeof buf, "T%02d:%02d", mod / 60, mod % 60);
  return format_day(m.day()) + buf;
}

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

inline bool valid_ymd(int y, int mo, int d) {
  using namespace std::chrono;
  return year_month_day{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}}.ok();
}

}  // namespace detail

// "YYYY-MM-DD"
inline std::optional<Day> parse_day(std::string_view s) {
  int y, mo, d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!detail::parse_fixed_int(s, 0, 4, y) || !detail::parse_fixed_int(s, 5, 2, mo) ||
      !detail::parse_fixed_int(s, 8, 2, d) || !detail::valid_ymd(y, mo, d))
    return std::nullopt;
  return make_day(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
}

// "YYYY-MM-DDTHH:MM" (a space separator is accepted as well).
inline std::optional<Minute> parse_minute(std::string_view s) {
  if (s.size() != 16 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
  auto day = parse_day(s.substr(0, 10));
  int h, mi;
  if (!day || !detail::parse_fixed_int(s, 11, 2, h) || !detail::parse_fixed_int(s, 14, 2, mi) ||
      h > 23 || mi > 59)
    return std::nullopt;
  return start_of(*day) + (h * 60 + mi);
}

// Sub-minute timestamp for raw frequency readings: "YYYY-MM-DDTHH:MM:SS[.fff]".
// Returns seconds since epoch.
inline std::optional<double> parse_seconds(std::string_view s) {
  if (s.size() < 19 || s[16] != ':') return std::nullopt;
  auto minute = parse_minute(s.substr(0, 16));
  int sec;
  if (!minute || !detail::parse_fixed_int(s, 17, 2, sec) || sec > 59) return std::nullopt;
  double frac = 0.0;
  if (s.size() > 19) {
    if (s[19] != '.' || s.size() == 20) return std::nullopt;
    double scale = 0.1;
    for (std::size_t i = 20; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      frac += (s[i] - '0') * scale;
      scale /= 10.0;
    }
  }
  return static_cast<double>(minute->index) * 60.0 + sec + frac;
}

}  // namespace flexbid
