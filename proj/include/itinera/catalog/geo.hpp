#pragma once

#include <string_view>

namespace itinera::catalog {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

enum class TravelMode { walk, drive };

std::string_view to_string(TravelMode mode);
TravelMode travel_mode_from_string(std::string_view s);

/// Mode speeds in km/h. Defaults match the offline routing model.
struct TravelSpeeds {
    double walk_kmh = 4.5;
    double drive_kmh = 40.0;

    double for_mode(TravelMode mode) const { return mode == TravelMode::walk ? walk_kmh : drive_kmh; }
};

inline constexpr double kEarthRadiusKm = 6371.0088;

void validate(const GeoPoint& p);

/// Great-circle distance in kilometres.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Whole minutes (ceiling) to cover the great-circle distance at the mode speed.
int travel_time(const GeoPoint& a, const GeoPoint& b, TravelMode mode, const TravelSpeeds& speeds = {});

}  // namespace itinera::catalog
