#include "itinera/common/dates.hpp"

#include <charconv>
#include <fmt/format.h>

namespace itinera {

std::optional<Date> make_date(int year, int month, int day) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return sys_days{ymd};
}

std::optional<Date> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    int m = 0;
    int d = 0;
    auto parse = [](std::string_view part, int& out) {
        const auto res = std::from_chars(part.data(), part.data() + part.size(), out);
        return res.ec == std::errc{} && res.ptr == part.data() + part.size();
    };
    if (!parse(s.substr(0, 4), y) || !parse(s.substr(5, 2), m) || !parse(s.substr(8, 2), d)) {
        return std::nullopt;
    }
    return make_date(y, m, d);
}

std::string format_iso_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

int weekday_index(Date d) {
    return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

Date date_from_epoch_ms(std::int64_t epoch_ms) {
    return std::chrono::floor<std::chrono::days>(std::chrono::sys_time<std::chrono::milliseconds>{
        std::chrono::milliseconds{epoch_ms}});
}

}  // namespace itinera
