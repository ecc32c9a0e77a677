#pragma once

#include "itinera/catalog/geo.hpp"

#include <array>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

namespace itinera::catalog {

/// Minutes from midnight, half-open semantics are not used: a visit may end exactly at `close`.
struct TimeInterval {
    int open = 0;
    int close = 0;

    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Opening intervals per weekday, index 0 = Monday. An empty day means closed.
struct OpeningHours {
    std::array<std::vector<TimeInterval>, 7> days;

    static OpeningHours every_day(int open, int close);
    const std::vector<TimeInterval>& on(int weekday) const { return days.at(static_cast<std::size_t>(weekday)); }

    friend bool operator==(const OpeningHours&, const OpeningHours&) = default;
};

struct Poi {
    std::string id;
    std::string name;
    std::string destination;
    std::set<std::string> category_tags;
    GeoPoint position;
    OpeningHours hours;
    int visit_duration = 0;  // minutes
    double cost_per_person = 0.0;
    std::string description;
    std::string source_ref;

    bool has_tag(const std::string& tag) const { return category_tags.contains(tag); }

    friend bool operator==(const Poi&, const Poi&) = default;
};

inline const std::string kRestaurantTag = "restaurant";
inline const std::string kFoodTag = "food";

/// Throws ValidationError naming the first offending field.
void validate(const OpeningHours& hours);
void validate(const Poi& poi);

void to_json(nlohmann::json& j, const GeoPoint& p);
void from_json(const nlohmann::json& j, GeoPoint& p);
void to_json(nlohmann::json& j, const OpeningHours& h);
void from_json(const nlohmann::json& j, OpeningHours& h);
void to_json(nlohmann::json& j, const Poi& poi);
void from_json(const nlohmann::json& j, Poi& poi);

}  // namespace itinera::catalog
