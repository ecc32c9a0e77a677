#include "itinera/common/clock.hpp"

#include "itinera/common/dates.hpp"

#include <array>
#include <charconv>
#include <fmt/format.h>
#include <thread>

namespace itinera {

std::int64_t SystemClock::now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
    if (ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
}

std::int64_t ManualClock::now_ms() {
    std::lock_guard lock(mutex_);
    const auto value = now_;
    now_ += tick_;
    return value;
}

void ManualClock::sleep_ms(std::int64_t ms) {
    advance(ms);
}

void ManualClock::advance(std::int64_t ms) {
    std::lock_guard lock(mutex_);
    if (ms > 0) {
        now_ += ms;
    }
}

std::string format_timestamp(std::int64_t epoch_ms) {
    using namespace std::chrono;
    const sys_days day{floor<days>(milliseconds(epoch_ms))};
    const year_month_day ymd{day};
    const auto in_day = epoch_ms - duration_cast<milliseconds>(day.time_since_epoch()).count();
    const auto h = in_day / 3'600'000;
    const auto m = (in_day / 60'000) % 60;
    const auto s = (in_day / 1000) % 60;
    const auto ms = in_day % 1000;
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h, m, s, ms);
}

namespace {

bool parse_int(std::string_view s, int& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::optional<std::int64_t> to_epoch_ms(int y, int mo, int d, int h, int mi, int sec, int ms) {
    const auto date = make_date(y, mo, d);
    if (!date || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) {
        return std::nullopt;
    }
    const auto days_ms = std::chrono::duration_cast<std::chrono::milliseconds>(date->time_since_epoch()).count();
    return days_ms + ((h * 60LL + mi) * 60LL + sec) * 1000LL + ms;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
        return std::nullopt;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
        !parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi) || !parse_int(s.substr(17, 2), sec)) {
        return std::nullopt;
    }
    auto rest = s.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t n = 1;
        while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') {
            ++n;
        }
        std::string frac(rest.substr(1, n - 1));
        frac.resize(3, '0');
        if (!parse_int(frac, ms)) {
            return std::nullopt;
        }
        rest.remove_prefix(n);
    }
    if (rest == "Z" || rest.empty() || rest == "+00:00") {
        return to_epoch_ms(y, mo, d, h, mi, sec, ms);
    }
    return std::nullopt;
}

std::optional<std::int64_t> parse_http_date(std::string_view s) {
    // "Sun, 06 Nov 1994 08:49:37 GMT"
    static constexpr std::array<std::string_view, 12> months{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                             "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    if (s.size() != 29 || s.substr(25) != " GMT") {
        return std::nullopt;
    }
    int d = 0, y = 0, h = 0, mi = 0, sec = 0;
    if (!parse_int(s.substr(5, 2), d) || !parse_int(s.substr(12, 4), y) || !parse_int(s.substr(17, 2), h) ||
        !parse_int(s.substr(20, 2), mi) || !parse_int(s.substr(23, 2), sec)) {
        return std::nullopt;
    }
    const auto mon = s.substr(8, 3);
    for (std::size_t m = 0; m < months.size(); ++m) {
        if (months[m] == mon) {
            return to_epoch_ms(y, static_cast<int>(m) + 1, d, h, mi, sec, 0);
        }
    }
    return std::nullopt;
}

}  // namespace itinera
