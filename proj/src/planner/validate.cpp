#include "itinera/planner/planner.hpp"

#include <cmath>
#include <fmt/format.h>
#include <map>

namespace itinera::planner {

namespace {

constexpr double kTolerance = 1e-6;

bool close_enough(double a, double b) {
    return std::abs(a - b) <= kTolerance * std::max(1.0, std::abs(b));
}

}  // namespace

std::vector<Violation> validate(const Itinerary& itinerary, const TripRequest& request,
                                const std::vector<catalog::Poi>& pois, const catalog::TravelMatrix& matrix,
                                const PlannerOptions& options) {
    std::vector<Violation> out;
    const auto add = [&](std::string rule, std::string element, std::string message) {
        out.push_back(Violation{std::move(rule), std::move(element), std::move(message)});
    };
    std::map<std::string, const catalog::Poi*> by_id;
    for (const auto& p : pois) {
        by_id.emplace(p.id, &p);
    }

    if (static_cast<int>(itinerary.days.size()) != request.day_count()) {
        add("date-range", "days", fmt::format("{} days for a {}-day trip", itinerary.days.size(), request.day_count()));
    }
    std::map<std::string, int> seen;
    const int cap = options.visit_cap(request.pace);
    for (std::size_t d = 0; d < itinerary.days.size(); ++d) {
        const auto& day = itinerary.days[d];
        const auto date = format_iso_date(day.date);
        if (day.date != request.date_of(static_cast<int>(d))) {
            add("date-range", date, fmt::format("day {} should be {}", d, format_iso_date(request.date_of(static_cast<int>(d)))));
        }
        if (day.window_start != options.day_start || day.window_end != options.day_end) {
            add("day-window", date, "day window differs from the configured window");
        }
        if (static_cast<int>(day.visits.size()) > cap) {
            add("pace", date, fmt::format("{} visits exceed the {} pace cap of {}", day.visits.size(), to_string(request.pace), cap));
        }
        if (day.legs.size() != (day.visits.empty() ? 0 : day.visits.size() - 1)) {
            add("legs", date, "leg count does not match visit count");
        }
        int restaurants = 0;
        const int weekday = weekday_index(day.date);
        for (std::size_t i = 0; i < day.visits.size(); ++i) {
            const auto& v = day.visits[i];
            const auto element = date + "/" + v.poi_id;
            if (++seen[v.poi_id] > 1) {
                add("uniqueness", element, "POI already visited");
            }
            if (v.arrival < day.window_start || v.departure > day.window_end) {
                add("day-window", element, "visit outside the day window");
            }
            if (i > 0) {
                const auto& prev = day.visits[i - 1];
                if (v.arrival < prev.departure) {
                    add("order", element, "overlaps the previous visit");
                } else if (matrix.covers(prev.poi_id) && matrix.covers(v.poi_id) &&
                           v.arrival - prev.departure < matrix.between(prev.poi_id, v.poi_id)) {
                    add("travel", element, "not enough time to travel from the previous visit");
                }
                if (i - 1 < day.legs.size()) {
                    const auto& leg = day.legs[i - 1];
                    if (leg.from != prev.poi_id || leg.to != v.poi_id ||
                        !matrix.covers(leg.from) || !matrix.covers(leg.to) ||
                        leg.minutes != matrix.between(leg.from, leg.to)) {
                        add("legs", element, "leg does not match the travel matrix");
                    }
                }
            }
            const auto it = by_id.find(v.poi_id);
            if (it == by_id.end()) {
                add("catalog", element, "unknown POI");
                continue;
            }
            const auto& poi = *it->second;
            if (v.departure - v.arrival != poi.visit_duration) {
                add("duration", element, fmt::format("visit lasts {} min, expected {}", v.departure - v.arrival, poi.visit_duration));
            }
            const auto& intervals = poi.hours.on(weekday);
            const bool open = std::any_of(intervals.begin(), intervals.end(), [&](const catalog::TimeInterval& iv) {
                return iv.open <= v.arrival && v.departure <= iv.close;
            });
            if (!open) {
                add("opening-hours", element, "visit outside opening hours");
            }
            if (poi.has_tag(catalog::kRestaurantTag)) {
                ++restaurants;
                if (v.arrival < options.meal_start || v.arrival > options.meal_end) {
                    add("meal", element, "restaurant visit outside the meal window");
                }
            }
            const auto sc = score_poi(poi, request, options);
            if (!sc.eligible) {
                add("eligibility", element, "conflicts with restriction " + sc.reason);
            }
            if (!close_enough(v.score, sc.score)) {
                add("score", element, "visit score differs from the POI score");
            }
            if (!close_enough(v.cost_for_party, poi.cost_per_person * request.party_size())) {
                add("cost", element, "cost is not cost per person times party size");
            }
        }
        if (restaurants > 1) {
            add("meal", date, "more than one restaurant in a day");
        }
    }
    const auto totals = recompute_totals(itinerary);
    if (!close_enough(itinerary.totals.score, totals.score) || !close_enough(itinerary.totals.cost, totals.cost) ||
        itinerary.totals.travel_minutes != totals.travel_minutes) {
        add("totals", "totals", "totals differ from the sum of their parts");
    }
    if (totals.cost > request.budget_total + kTolerance) {
        add("budget", "totals", fmt::format("cost {:.2f} exceeds budget {:.2f}", totals.cost, request.budget_total));
    }
    return out;
}

std::vector<Violation> validate(const Itinerary& itinerary, const TripRequest& request,
                                const catalog::Catalog& catalog, const catalog::TravelMatrix& matrix,
                                const PlannerOptions& options) {
    std::vector<catalog::Poi> pois;
    for (const auto& d : itinerary.days) {
        for (const auto& v : d.visits) {
            if (auto p = catalog.get(v.poi_id)) {
                pois.push_back(std::move(*p));
            }
        }
    }
    return validate(itinerary, request, pois, matrix, options);
}

}  // namespace itinera::planner
