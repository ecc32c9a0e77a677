#pragma once

#include "itinera/catalog/catalog.hpp"
#include "itinera/catalog/poi.hpp"
#include "itinera/catalog/travel_matrix.hpp"
#include "itinera/planner/itinerary.hpp"
#include "itinera/planner/trip_request.hpp"

#include <array>
#include <set>
#include <string>
#include <vector>

namespace itinera::planner {

struct PlannerOptions {
    int day_start = 540;
    int day_end = 1140;
    int meal_start = 750;  // restaurant arrivals fall inside [meal_start, meal_end]
    int meal_end = 870;
    int iteration_cap = 1000;
    int perturbation_rounds = 12;
    std::uint64_t perturbation_seed = 0x17e5a;
    std::array<int, 3> pace_caps{3, 5, 7};  // relaxed, normal, intense
    /// Tags liked by similar profiles get their weight multiplied by (1 + similar_bonus).
    std::set<std::string> bonus_tags;
    double similar_bonus = 0.0;

    int visit_cap(Pace p) const { return pace_caps[static_cast<std::size_t>(p)]; }
};

struct PoiScore {
    double score = 0.0;
    bool eligible = true;
    std::string reason;  // why ineligible
};

/// Sum of preference weights over the POI's tags; restriction conflicts make it ineligible with score 0.
PoiScore score_poi(const catalog::Poi& poi, const TripRequest& request, const PlannerOptions& options = {});

struct PlanResult {
    Itinerary itinerary;
    PlanDiagnostics diagnostics;
};

PlanResult plan(const TripRequest& request, const std::vector<catalog::Poi>& candidates,
                const catalog::TravelMatrix& matrix, const PlannerOptions& options = {});

/// Locked POIs keep their day (by date) and relative order; dropped POIs are excluded.
PlanResult replan(const TripRequest& request, const Itinerary& current, const std::set<std::string>& locks,
                  const std::set<std::string>& drops, const std::vector<catalog::Poi>& candidates,
                  const catalog::TravelMatrix& matrix, const PlannerOptions& options = {});

inline constexpr std::size_t kBruteForceLimit = 8;

/// Exhaustive search for small instances. `locks` restricts to plans containing every current
/// locked visit on its day in its current relative order.
Itinerary brute_force_plan(const TripRequest& request, const std::vector<catalog::Poi>& candidates,
                           const catalog::TravelMatrix& matrix, const PlannerOptions& options = {},
                           const Itinerary* current = nullptr, const std::set<std::string>& locks = {});

struct Violation {
    std::string rule;
    std::string element;
    std::string message;
};

std::vector<Violation> validate(const Itinerary& itinerary, const TripRequest& request,
                                const std::vector<catalog::Poi>& pois, const catalog::TravelMatrix& matrix,
                                const PlannerOptions& options = {});
std::vector<Violation> validate(const Itinerary& itinerary, const TripRequest& request,
                                const catalog::Catalog& catalog, const catalog::TravelMatrix& matrix,
                                const PlannerOptions& options = {});

/// Day schedules for the request's dates with no visits.
Itinerary empty_itinerary(const TripRequest& request, const PlannerOptions& options = {});

void to_json(nlohmann::json& j, const Violation& v);

}  // namespace itinera::planner
