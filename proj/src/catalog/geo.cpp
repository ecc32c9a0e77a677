#include "itinera/catalog/geo.hpp"

#include "itinera/common/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace itinera::catalog {

std::string_view to_string(TravelMode mode) {
    return mode == TravelMode::walk ? "walk" : "drive";
}

TravelMode travel_mode_from_string(std::string_view s) {
    if (s == "walk") {
        return TravelMode::walk;
    }
    if (s == "drive") {
        return TravelMode::drive;
    }
    throw ValidationError("mode", "unknown travel mode '" + std::string(s) + "'");
}

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || p.lat < -90.0 || p.lat > 90.0) {
        throw ValidationError("lat", "latitude out of [-90, 90]");
    }
    if (!std::isfinite(p.lon) || p.lon < -180.0 || p.lon > 180.0) {
        throw ValidationError("lon", "longitude out of [-180, 180]");
    }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double phi1 = a.lat * deg;
    const double phi2 = b.lat * deg;
    const double dphi = (b.lat - a.lat) * deg;
    const double dlambda = (b.lon - a.lon) * deg;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

int travel_time(const GeoPoint& a, const GeoPoint& b, TravelMode mode, const TravelSpeeds& speeds) {
    if (a == b) {
        return 0;
    }
    const double minutes = haversine_km(a, b) / speeds.for_mode(mode) * 60.0;
    // Distinct points always cost at least one minute so that zero means "same place".
    return std::max(1, static_cast<int>(std::ceil(minutes)));
}

}  // namespace itinera::catalog
