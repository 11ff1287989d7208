#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace fairtext {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

// YYYY-MM-DD
std::optional<Date> parse_date(std::string_view text);
// YYYY-MM-DD, optionally followed by THH:MM[:SS[.fff]] and Z or +HH:MM / -HH:MM.
// Offsets are folded into UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::string format_date(Date d);
std::string format_timestamp(Timestamp t);  // YYYY-MM-DDTHH:MM:SSZ

inline Timestamp start_of(Date d) { return Timestamp{d}; }
inline Date date_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

// Completed calendar years from `from` to `to` (birthday arithmetic). A
// February 29 birthday is reached on March 1 in common years.
int whole_years_between(Date from, Date to);

// Calendar shift by whole years; Feb 29 becomes Mar 1 in common years, the
// same day whole_years_between counts as the birthday.
Date add_years(Date d, int years);

}  // namespace fairtext
