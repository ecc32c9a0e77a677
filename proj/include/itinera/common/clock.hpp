#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace itinera {

/// Wall-clock source. Injected everywhere time is observed so tests can run on a fake clock.
class Clock {
public:
    virtual ~Clock() = default;
    /// Milliseconds since the Unix epoch.
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
};

/// Deterministic clock: time moves only by `sleep_ms`, `advance`, and the optional per-read tick.
class ManualClock final : public Clock {
public:
    explicit ManualClock(std::int64_t start_ms = 1'735'689'600'000 /* 2025-01-01T00:00:00Z */, std::int64_t tick_ms = 0)
        : now_(start_ms), tick_(tick_ms) {}

    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
    void advance(std::int64_t ms);

private:
    std::mutex mutex_;
    std::int64_t now_;
    std::int64_t tick_;
};

/// RFC 3339 UTC timestamp with millisecond precision.
std::string format_timestamp(std::int64_t epoch_ms);

/// "YYYY-MM-DDTHH:MM:SS" with optional fraction and "Z"; offsets other than Z are rejected.
std::optional<std::int64_t> parse_timestamp(std::string_view s);

/// IMF-fixdate as used in HTTP headers: "Sun, 06 Nov 1994 08:49:37 GMT".
std::optional<std::int64_t> parse_http_date(std::string_view s);

}  // namespace itinera
