#include "fairtext/dates.hpp"

#include <charconv>
#include <cstdio>

namespace fairtext {
namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

std::optional<Date> parse_date_prefix(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, m) || !read_int(s, 8, 2, d)) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return parse_date_prefix(text);
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  auto day = parse_date_prefix(s);
  if (!day) return std::nullopt;
  Timestamp t = start_of(*day);
  if (s.size() == 10) return t;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(s, 11, 2, hh) || s.size() < 16 || s[13] != ':' || !read_int(s, 14, 2, mm)) {
    return std::nullopt;
  }
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!read_int(s, pos + 1, 2, ss)) return std::nullopt;
    pos += 3;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;  // fractional seconds ignored
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  t += std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
  if (pos == s.size()) return t;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return t;
  if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
    int oh = 0, om = 0;
    if (!read_int(s, pos + 1, 2, oh) || !read_int(s, pos + 4, 2, om)) return std::nullopt;
    auto offset = std::chrono::hours{oh} + std::chrono::minutes{om};
    return s[pos] == '+' ? t - offset : t + offset;
  }
  return std::nullopt;
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp t) {
  Date d = date_of(t);
  std::chrono::hh_mm_ss hms{t - start_of(d)};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

int whole_years_between(Date from, Date to) {
  std::chrono::year_month_day a{from};
  std::chrono::year_month_day b{to};
  int years = static_cast<int>(b.year()) - static_cast<int>(a.year());
  auto md_a = std::pair{static_cast<unsigned>(a.month()), static_cast<unsigned>(a.day())};
  auto md_b = std::pair{static_cast<unsigned>(b.month()), static_cast<unsigned>(b.day())};
  if (md_b < md_a) --years;
  return years;
}

Date add_years(Date d, int years) {
  std::chrono::year_month_day ymd{d};
  std::chrono::year_month_day shifted{ymd.year() + std::chrono::years{years}, ymd.month(), ymd.day()};
  if (!shifted.ok()) {
    shifted = std::chrono::year_month_day{shifted.year(), std::chrono::March, std::chrono::day{1}};
  }
  return Date{shifted};
}

}  // namespace fairtext
