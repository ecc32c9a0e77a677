#include "itinera/catalog/poi.hpp"

#include "itinera/common/errors.hpp"

#include <cmath>
#include <json.hpp>

namespace itinera::catalog {

namespace {

constexpr std::array<const char*, 7> kDayKeys{"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

}  // namespace

OpeningHours OpeningHours::every_day(int open, int close) {
    OpeningHours h;
    for (auto& d : h.days) {
        d.push_back({open, close});
    }
    return h;
}

void validate(const OpeningHours& hours) {
    for (std::size_t d = 0; d < hours.days.size(); ++d) {
        int previous_close = -1;
        for (const auto& iv : hours.days[d]) {
            if (iv.open < 0 || iv.open >= iv.close || iv.close > 1440) {
                throw ValidationError("hours", std::string("invalid interval on ") + kDayKeys[d]);
            }
            if (iv.open < previous_close) {
                throw ValidationError("hours", std::string("overlapping or unsorted intervals on ") + kDayKeys[d]);
            }
            previous_close = iv.close;
        }
    }
}

void validate(const Poi& poi) {
    if (poi.id.empty()) {
        throw ValidationError("id", "must not be empty");
    }
    if (poi.name.empty()) {
        throw ValidationError("name", "must not be empty");
    }
    if (poi.category_tags.empty()) {
        throw ValidationError("category_tags", "must not be empty");
    }
    validate(poi.position);
    validate(poi.hours);
    if (poi.visit_duration <= 0) {
        throw ValidationError("visit_duration", "must be positive");
    }
    if (!std::isfinite(poi.cost_per_person) || poi.cost_per_person < 0.0) {
        throw ValidationError("cost_per_person", "must be non-negative");
    }
}

void to_json(nlohmann::json& j, const GeoPoint& p) {
    j = nlohmann::json{{"lat", p.lat}, {"lon", p.lon}};
}

void from_json(const nlohmann::json& j, GeoPoint& p) {
    j.at("lat").get_to(p.lat);
    j.at("lon").get_to(p.lon);
}

void to_json(nlohmann::json& j, const OpeningHours& h) {
    j = nlohmann::json::object();
    for (std::size_t d = 0; d < h.days.size(); ++d) {
        auto intervals = nlohmann::json::array();
        for (const auto& iv : h.days[d]) {
            intervals.push_back({iv.open, iv.close});
        }
        j[kDayKeys[d]] = std::move(intervals);
    }
}

void from_json(const nlohmann::json& j, OpeningHours& h) {
    h = OpeningHours{};
    for (std::size_t d = 0; d < kDayKeys.size(); ++d) {
        if (!j.contains(kDayKeys[d])) {
            continue;
        }
        for (const auto& pair : j.at(kDayKeys[d])) {
            if (!pair.is_array() || pair.size() != 2) {
                throw ValidationError("hours", "interval must be [open, close]");
            }
            h.days[d].push_back({pair[0].get<int>(), pair[1].get<int>()});
        }
    }
}

void to_json(nlohmann::json& j, const Poi& poi) {
    j = nlohmann::json{{"id", poi.id},
                       {"name", poi.name},
                       {"destination", poi.destination},
                       {"category_tags", poi.category_tags},
                       {"position", poi.position},
                       {"hours", poi.hours},
                       {"visit_duration", poi.visit_duration},
                       {"cost_per_person", poi.cost_per_person},
                       {"description", poi.description},
                       {"source_ref", poi.source_ref}};
}

void from_json(const nlohmann::json& j, Poi& poi) {
    poi = Poi{};
    j.at("id").get_to(poi.id);
    j.at("name").get_to(poi.name);
    poi.destination = j.value("destination", "");
    j.at("category_tags").get_to(poi.category_tags);
    j.at("position").get_to(poi.position);
    j.at("hours").get_to(poi.hours);
    j.at("visit_duration").get_to(poi.visit_duration);
    j.at("cost_per_person").get_to(poi.cost_per_person);
    poi.description = j.value("description", "");
    poi.source_ref = j.value("source_ref", "");
}

}  // namespace itinera::catalog
