#include "itinera/planner/trip_request.hpp"

#include "itinera/common/errors.hpp"

#include <cmath>

namespace itinera::planner {

std::string_view to_string(Pace p) {
    switch (p) {
        case Pace::relaxed: return "relaxed";
        case Pace::normal: return "normal";
        case Pace::intense: return "intense";
    }
    return "normal";
}

Pace pace_from_string(std::string_view s) {
    if (s == "relaxed") {
        return Pace::relaxed;
    }
    if (s == "normal") {
        return Pace::normal;
    }
    if (s == "intense") {
        return Pace::intense;
    }
    throw ValidationError("pace", "unknown pace '" + std::string(s) + "'");
}

int TripRequest::day_count() const {
    return static_cast<int>((end_date - start_date).count()) + 1;
}

Date TripRequest::date_of(int day) const {
    return start_date + std::chrono::days(day);
}

void validate(const TripRequest& r) {
    if (r.end_date < r.start_date) {
        throw ValidationError("date_range", "end date before start date");
    }
    if (r.adults < 1) {
        throw ValidationError("adults", "at least one adult");
    }
    if (r.children < 0) {
        throw ValidationError("children", "must not be negative");
    }
    if (!std::isfinite(r.budget_total) || r.budget_total < 0.0) {
        throw ValidationError("budget_total", "must be non-negative");
    }
    for (const auto& [tag, w] : r.preference_weights) {
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
            throw ValidationError("preference_weights", "weight for '" + tag + "' outside [0, 1]");
        }
    }
}

void to_json(nlohmann::json& j, const TripRequest& r) {
    j = nlohmann::json{{"destination", r.destination},
                       {"start_date", format_iso_date(r.start_date)},
                       {"end_date", format_iso_date(r.end_date)},
                       {"adults", r.adults},
                       {"children", r.children},
                       {"preference_weights", r.preference_weights},
                       {"budget_total", r.budget_total},
                       {"restrictions", r.restrictions},
                       {"pace", to_string(r.pace)}};
}

void from_json(const nlohmann::json& j, TripRequest& r) {
    const auto date = [&](const char* key) {
        const auto d = parse_iso_date(j.at(key).get<std::string>());
        if (!d) {
            throw ValidationError(key, "not an ISO date");
        }
        return *d;
    };
    r.destination = j.value("destination", "");
    r.start_date = date("start_date");
    r.end_date = date("end_date");
    r.adults = j.value("adults", 1);
    r.children = j.value("children", 0);
    r.preference_weights = j.value("preference_weights", std::map<std::string, double>{});
    r.budget_total = j.value("budget_total", 0.0);
    r.restrictions = j.value("restrictions", std::set<std::string>{});
    r.pace = pace_from_string(j.value("pace", "normal"));
}

}  // namespace itinera::planner
