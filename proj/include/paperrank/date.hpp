#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "paperrank/error.hpp"

namespace paperrank {

using Days = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD`, optionally followed by a `T...` time part which is
/// dropped (all dates are midnight UTC).
inline Days parse_date(std::string_view text) {
  if (text.size() >= 10 && (text.size() == 10 || text[10] == 'T' || text[10] == ' ')) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    std::string head(text.substr(0, 10));
    if (std::sscanf(head.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) == 3 &&
        head[4] == '-' && head[7] == '-') {
      std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                      std::chrono::day{d}};
      if (ymd.ok()) return Days{ymd};
    }
  }
  throw ValidationError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
}

inline std::string format_date(Days day) {
  std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline Instant to_instant(Days day) { return Instant{day}; }

inline Instant now_instant() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

/// Seconds since the epoch, used by the wire formats.
inline long long to_unix(Instant t) { return t.time_since_epoch().count(); }
inline Instant from_unix(long long s) { return Instant{std::chrono::seconds{s}}; }

}  // namespace paperrank
