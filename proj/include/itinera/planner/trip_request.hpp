#pragma once

#include "itinera/common/dates.hpp"

#include <json.hpp>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace itinera::planner {

enum class Pace { relaxed, normal, intense };

std::string_view to_string(Pace p);
Pace pace_from_string(std::string_view s);

struct TripRequest {
    std::string destination;
    Date start_date{};
    Date end_date{};
    int adults = 1;
    int children = 0;
    std::map<std::string, double> preference_weights;
    double budget_total = 0.0;
    std::set<std::string> restrictions;  // "vegetarian", "gluten-free", "allergy:<x>", "accessible"
    Pace pace = Pace::normal;

    int party_size() const { return adults + children; }
    /// Inclusive day count of the date range.
    int day_count() const;
    Date date_of(int day) const;

    friend bool operator==(const TripRequest&, const TripRequest&) = default;
};

/// Throws ValidationError naming the first offending field.
void validate(const TripRequest& r);

void to_json(nlohmann::json& j, const TripRequest& r);
void from_json(const nlohmann::json& j, TripRequest& r);

}  // namespace itinera::planner
