#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace itinera {

using Date = std::chrono::sys_days;

/// Parses "YYYY-MM-DD"; nullopt on malformed or impossible dates.
std::optional<Date> parse_iso_date(std::string_view s);
std::string format_iso_date(Date d);

/// 0 = Monday ... 6 = Sunday.
int weekday_index(Date d);

std::optional<Date> make_date(int year, int month, int day);
Date date_from_epoch_ms(std::int64_t epoch_ms);

}  // namespace itinera
