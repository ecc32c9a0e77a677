#pragma once

#include "itinera/catalog/poi.hpp"
#include "itinera/catalog/travel_matrix.hpp"
#include "itinera/planner/trip_request.hpp"

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <vector>

namespace itinera::planner {

/// A self-contained planning problem, as read by `itinera plan` and the benchmarks.
struct PlanInstance {
    TripRequest request;
    std::vector<catalog::Poi> pois;
    catalog::TravelMatrix matrix;
};

struct InstanceShape {
    int min_pois = 2;
    int max_pois = 40;
    int min_days = 1;
    int max_days = 4;
};

/// Seeded synthetic instance around a town centre: mixed hours, restaurants, costs and weights.
PlanInstance random_instance(std::uint64_t seed, const InstanceShape& shape = {});

/// `{"request": ..., "pois": [...], "matrix": {...}?, "mode": "walk"|"drive"}`; the matrix is
/// computed from positions when absent.
PlanInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const PlanInstance& instance);
PlanInstance load_instance(const std::filesystem::path& path);

}  // namespace itinera::planner
