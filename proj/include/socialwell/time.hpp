#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace socialwell::time {

using Instant = std::chrono::sys_seconds;

/// Where a period label (ISO week "2015-W03") is stamped on the time axis.
enum class PeriodStamp { End, Midpoint };

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.fff]][Z|+hh:mm]" and ISO week
/// labels "YYYY-Www" (stamped at the week's Sunday, or Thursday for Midpoint).
/// Throws std::invalid_argument on anything else.
Instant parse_instant(std::string_view text, PeriodStamp stamp = PeriodStamp::End);

/// Fractional days between two instants.
double days_between(Instant origin, Instant t);

/// Instant lying `days` after `origin`, rounded to the nearest second.
Instant add_days(Instant origin, double days);

std::string format_date(std::chrono::sys_days day);

/// Date if the instant is midnight, full date-time otherwise.
std::string format_instant(Instant t);

}  // namespace socialwell::time
