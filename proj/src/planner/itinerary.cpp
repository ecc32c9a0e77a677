#include "itinera/planner/itinerary.hpp"

#include "itinera/common/errors.hpp"

#include <algorithm>

namespace itinera::planner {

std::size_t Itinerary::visit_count() const {
    std::size_t n = 0;
    for (const auto& d : days) {
        n += d.visits.size();
    }
    return n;
}

bool Itinerary::contains(const std::string& poi_id) const {
    return std::any_of(days.begin(), days.end(), [&](const DaySchedule& d) {
        return std::any_of(d.visits.begin(), d.visits.end(), [&](const Visit& v) { return v.poi_id == poi_id; });
    });
}

Totals recompute_totals(const Itinerary& it) {
    Totals t;
    for (const auto& d : it.days) {
        for (const auto& v : d.visits) {
            t.score += v.score;
            t.cost += v.cost_for_party;
        }
        for (const auto& l : d.legs) {
            t.travel_minutes += l.minutes;
        }
    }
    return t;
}

void to_json(nlohmann::json& j, const Visit& v) {
    j = nlohmann::json{{"poi_id", v.poi_id},     {"poi_name", v.poi_name},
                       {"arrival", v.arrival},   {"departure", v.departure},
                       {"cost_for_party", v.cost_for_party}, {"score", v.score}};
}

void from_json(const nlohmann::json& j, Visit& v) {
    j.at("poi_id").get_to(v.poi_id);
    v.poi_name = j.value("poi_name", "");
    j.at("arrival").get_to(v.arrival);
    j.at("departure").get_to(v.departure);
    v.cost_for_party = j.value("cost_for_party", 0.0);
    v.score = j.value("score", 0.0);
}

void to_json(nlohmann::json& j, const TravelLeg& l) {
    j = nlohmann::json{{"from", l.from}, {"to", l.to}, {"minutes", l.minutes}};
}

void from_json(const nlohmann::json& j, TravelLeg& l) {
    j.at("from").get_to(l.from);
    j.at("to").get_to(l.to);
    j.at("minutes").get_to(l.minutes);
}

void to_json(nlohmann::json& j, const DaySchedule& d) {
    j = nlohmann::json{{"date", format_iso_date(d.date)},
                       {"window", {{"start", d.window_start}, {"end", d.window_end}}},
                       {"visits", d.visits},
                       {"legs", d.legs}};
}

void from_json(const nlohmann::json& j, DaySchedule& d) {
    const auto date = parse_iso_date(j.at("date").get<std::string>());
    if (!date) {
        throw ValidationError("date", "not an ISO date");
    }
    d.date = *date;
    d.window_start = j.at("window").at("start").get<int>();
    d.window_end = j.at("window").at("end").get<int>();
    j.at("visits").get_to(d.visits);
    j.at("legs").get_to(d.legs);
}

void to_json(nlohmann::json& j, const Totals& t) {
    j = nlohmann::json{{"score", t.score}, {"cost", t.cost}, {"travel_minutes", t.travel_minutes}};
}

void from_json(const nlohmann::json& j, Totals& t) {
    j.at("score").get_to(t.score);
    j.at("cost").get_to(t.cost);
    j.at("travel_minutes").get_to(t.travel_minutes);
}

void to_json(nlohmann::json& j, const Itinerary& it) {
    j = nlohmann::json{{"days", it.days}, {"totals", it.totals}};
}

void from_json(const nlohmann::json& j, Itinerary& it) {
    j.at("days").get_to(it.days);
    j.at("totals").get_to(it.totals);
}

void to_json(nlohmann::json& j, const PlanDiagnostics& d) {
    j = nlohmann::json{{"iterations", d.iterations},
                       {"improvements", d.improvements},
                       {"rejections", d.rejections},
                       {"rejected_pois", d.rejected_pois}};
}

}  // namespace itinera::planner
