#include "itinera/planner/planner.hpp"

namespace itinera::planner {

namespace {

bool needs_tag_everywhere(const std::string& restriction) {
    return restriction == "accessible" || restriction == "wheelchair";
}

/// Tag a restaurant must carry to satisfy a dietary restriction.
std::string diet_tag(const std::string& restriction) {
    constexpr std::string_view kAllergy = "allergy:";
    if (restriction.starts_with(kAllergy)) {
        return restriction.substr(kAllergy.size()) + "-free";
    }
    return restriction;
}

}  // namespace

PoiScore score_poi(const catalog::Poi& poi, const TripRequest& request, const PlannerOptions& options) {
    for (const auto& r : request.restrictions) {
        if (needs_tag_everywhere(r)) {
            if (!poi.has_tag("accessible")) {
                return {0.0, false, r};
            }
        } else if (poi.has_tag(catalog::kRestaurantTag) && !poi.has_tag(diet_tag(r))) {
            return {0.0, false, r};
        }
    }
    double score = 0.0;
    for (const auto& tag : poi.category_tags) {
        const auto it = request.preference_weights.find(tag);
        if (it == request.preference_weights.end()) {
            continue;
        }
        const double bonus = options.bonus_tags.contains(tag) ? 1.0 + options.similar_bonus : 1.0;
        score += it->second * bonus;
    }
    return {score, true, {}};
}

}  // namespace itinera::planner
