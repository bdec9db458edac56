#include "socialwell/time.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace socialwell::time {

namespace {

using namespace std::chrono;

bool read_int(std::string_view s, std::size_t& pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  int v = 0;
  for (std::size_t k = 0; k < width; ++k) {
    const char c = s[pos + k];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  pos += width;
  out = v;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

[[noreturn]] void bad(std::string_view text) {
  throw std::invalid_argument("invalid ISO-8601 timestamp '" + std::string(text) + "'");
}

sys_days iso_week_monday(int iso_year, int week) {
  // Jan 4th always lies in ISO week 1.
  const sys_days jan4 = year{iso_year} / January / 4;
  const weekday wd{jan4};
  const int back = (wd.c_encoding() + 6) % 7;  // days since Monday
  return jan4 - days{back} + weeks{week - 1};
}

}  // namespace

Instant parse_instant(std::string_view text, PeriodStamp stamp) {
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0;
  if (!read_int(text, pos, 4, y) || !expect(text, pos, '-')) bad(text);

  if (expect(text, pos, 'W')) {
    int wk = 0;
    if (!read_int(text, pos, 2, wk) || pos != text.size() || wk < 1 || wk > 53) bad(text);
    const sys_days monday = iso_week_monday(y, wk);
    if (wk == 53 && year_month_day{monday + days{3}}.year() != year{y}) bad(text);
    return Instant{monday + days{stamp == PeriodStamp::End ? 6 : 3}};
  }

  if (!read_int(text, pos, 2, mo) || !expect(text, pos, '-') || !read_int(text, pos, 2, d)) bad(text);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad(text);
  Instant result{sys_days{ymd}};
  if (pos == text.size()) return result;

  if (!expect(text, pos, 'T') && !expect(text, pos, ' ')) bad(text);
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(text, pos, 2, hh) || !expect(text, pos, ':') || !read_int(text, pos, 2, mm)) bad(text);
  if (expect(text, pos, ':')) {
    if (!read_int(text, pos, 2, ss)) bad(text);
    if (expect(text, pos, '.')) {
      // Sub-second digits are accepted but truncated.
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) bad(text);
  result += hours{hh} + minutes{mm} + seconds{ss};

  if (pos == text.size() || expect(text, pos, 'Z')) {
    if (pos != text.size()) bad(text);
    return result;
  }
  const char sign = text[pos];
  if (sign != '+' && sign != '-') bad(text);
  ++pos;
  int oh = 0, om = 0;
  if (!read_int(text, pos, 2, oh)) bad(text);
  expect(text, pos, ':');
  if (!read_int(text, pos, 2, om) || pos != text.size()) bad(text);
  const seconds offset = hours{oh} + minutes{om};
  return sign == '+' ? result - offset : result + offset;
}

double days_between(Instant origin, Instant t) {
  return static_cast<double>((t - origin).count()) / 86400.0;
}

Instant add_days(Instant origin, double days) {
  return origin + seconds{static_cast<long long>(std::llround(days * 86400.0))};
}

std::string format_date(sys_days day) {
  const year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_instant(Instant t) {
  const sys_days day = floor<days>(t);
  const int rem = static_cast<int>((t - day).count());
  if (rem == 0) return format_date(day);
  char buf[40];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d", rem / 3600, (rem / 60) % 60, rem % 60);
  return format_date(day) + buf;
}

}  // namespace socialwell::time
