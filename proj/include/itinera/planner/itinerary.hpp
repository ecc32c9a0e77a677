#pragma once

#include "itinera/common/dates.hpp"

#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace itinera::planner {

struct Visit {
    std::string poi_id;
    std::string poi_name;
    int arrival = 0;    // minutes from midnight
    int departure = 0;
    double cost_for_party = 0.0;
    double score = 0.0;

    friend bool operator==(const Visit&, const Visit&) = default;
};

struct TravelLeg {
    std::string from;
    std::string to;
    int minutes = 0;

    friend bool operator==(const TravelLeg&, const TravelLeg&) = default;
};

struct DaySchedule {
    Date date{};
    std::vector<Visit> visits;
    std::vector<TravelLeg> legs;
    int window_start = 540;
    int window_end = 1140;

    friend bool operator==(const DaySchedule&, const DaySchedule&) = default;
};

struct Totals {
    double score = 0.0;
    double cost = 0.0;
    int travel_minutes = 0;

    friend bool operator==(const Totals&, const Totals&) = default;
};

struct Itinerary {
    std::vector<DaySchedule> days;
    Totals totals;

    std::size_t visit_count() const;
    bool contains(const std::string& poi_id) const;

    friend bool operator==(const Itinerary&, const Itinerary&) = default;
};

struct PlanDiagnostics {
    int iterations = 0;
    int improvements = 0;
    std::map<std::string, int> rejections;            // reason -> count
    std::map<std::string, std::string> rejected_pois;  // poi id -> reason
};

/// Sums visit scores, visit costs and leg minutes.
Totals recompute_totals(const Itinerary& it);

void to_json(nlohmann::json& j, const Visit& v);
void from_json(const nlohmann::json& j, Visit& v);
void to_json(nlohmann::json& j, const TravelLeg& l);
void from_json(const nlohmann::json& j, TravelLeg& l);
void to_json(nlohmann::json& j, const DaySchedule& d);
void from_json(const nlohmann::json& j, DaySchedule& d);
void to_json(nlohmann::json& j, const Totals& t);
void from_json(const nlohmann::json& j, Totals& t);
void to_json(nlohmann::json& j, const Itinerary& it);
void from_json(const nlohmann::json& j, Itinerary& it);
void to_json(nlohmann::json& j, const PlanDiagnostics& d);

}  // namespace itinera::planner
