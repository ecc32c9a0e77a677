#pragma once

#include "itinera/common/dates.hpp"
#include "itinera/planner/trip_request.hpp"

#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace itinera::dialogue {

/// The five collected slots, in asking order. Pace is optional and never asked.
enum class Slot { destination, dates, party, preferences, budget, none };

std::string_view to_string(Slot s);
Slot slot_from_string(std::string_view s);

/// Partial TripRequest produced by extraction. Unset fields leave the request untouched.
struct SlotUpdate {
    std::optional<std::string> destination;
    std::optional<Date> start_date;
    std::optional<Date> end_date;
    std::optional<int> nights;  // resolved against the start date (or the session's reference date)
    std::optional<int> adults;
    std::optional<int> children;
    std::map<std::string, double> preference_weights;
    std::set<std::string> restrictions;
    std::optional<double> budget_total;
    std::optional<planner::Pace> pace;

    bool empty() const;
    friend bool operator==(const SlotUpdate&, const SlotUpdate&) = default;
};

/// Same invariants as TripRequest, applied to whichever fields are present.
bool is_valid(const SlotUpdate& u, std::string* why = nullptr);

void to_json(nlohmann::json& j, const SlotUpdate& u);
void from_json(const nlohmann::json& j, SlotUpdate& u);

}  // namespace itinera::dialogue
