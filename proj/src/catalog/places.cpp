#include "itinera/catalog/places.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/http_client.hpp"
#include "itinera/common/text.hpp"

#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace itinera::catalog {

namespace {

const std::map<std::string, std::vector<std::string>>& type_tags() {
    static const std::map<std::string, std::vector<std::string>> table{
        {"museum", {"museum", "culture"}},
        {"art_gallery", {"art", "culture"}},
        {"church", {"church", "history"}},
        {"place_of_worship", {"church", "history"}},
        {"park", {"nature"}},
        {"natural_feature", {"nature"}},
        {"campground", {"nature"}},
        {"restaurant", {"restaurant", "food"}},
        {"meal_takeaway", {"food"}},
        {"cafe", {"food"}},
        {"bakery", {"food"}},
        {"bar", {"nightlife"}},
        {"night_club", {"nightlife"}},
        {"tourist_attraction", {"sightseeing"}},
        {"amusement_park", {"family"}},
        {"zoo", {"family", "nature"}},
        {"aquarium", {"family"}},
        {"shopping_mall", {"shopping"}},
        {"store", {"shopping"}},
        {"library", {"culture"}},
        {"stadium", {"sport"}},
    };
    return table;
}

int default_duration(const std::set<std::string>& tags) {
    if (tags.contains("museum")) {
        return 90;
    }
    if (tags.contains(kRestaurantTag)) {
        return 75;
    }
    if (tags.contains("church")) {
        return 30;
    }
    return 60;
}

int parse_hhmm(const std::string& s) {
    if (s.size() != 4) {
        throw ValidationError("hours", "bad time " + s);
    }
    return std::stoi(s.substr(0, 2)) * 60 + std::stoi(s.substr(2, 2));
}

OpeningHours map_hours(const nlohmann::json& place) {
    const auto oh = place.find("opening_hours");
    if (oh == place.end() || !oh->contains("periods")) {
        return OpeningHours::every_day(9 * 60, 19 * 60);
    }
    OpeningHours hours;
    for (const auto& period : oh->at("periods")) {
        const auto& open = period.at("open");
        // Provider weekdays start on Sunday.
        const int day = (open.at("day").get<int>() + 6) % 7;
        const int start = parse_hhmm(open.at("time").get<std::string>());
        int end = 1440;
        if (period.contains("close")) {
            const auto& close = period.at("close");
            if (close.at("day").get<int>() == open.at("day").get<int>()) {
                end = parse_hhmm(close.at("time").get<std::string>());
            }
        }
        if (end > start) {
            hours.days[static_cast<std::size_t>(day)].push_back({start, end});
        }
    }
    for (auto& d : hours.days) {
        std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.open < b.open; });
    }
    return hours;
}

}  // namespace

std::vector<Poi> parse_places_response(const nlohmann::json& payload, const std::string& destination) {
    std::vector<Poi> out;
    const auto results = payload.find("results");
    if (results == payload.end() || !results->is_array()) {
        return out;
    }
    for (const auto& place : *results) {
        try {
            if (!place.contains("place_id") || !place.contains("name") || !place.contains("geometry")) {
                spdlog::warn("places: skipping record without id/name/geometry");
                continue;
            }
            Poi poi;
            poi.id = "places:" + place.at("place_id").get<std::string>();
            poi.name = place.at("name").get<std::string>();
            poi.destination = destination;
            const auto& loc = place.at("geometry").at("location");
            poi.position = {loc.at("lat").get<double>(), loc.at("lng").get<double>()};
            for (const auto& type : place.value("types", std::vector<std::string>{})) {
                const auto it = type_tags().find(type);
                if (it != type_tags().end()) {
                    poi.category_tags.insert(it->second.begin(), it->second.end());
                }
            }
            if (poi.category_tags.empty()) {
                poi.category_tags.insert("sightseeing");
            }
            poi.hours = map_hours(place);
            poi.visit_duration = default_duration(poi.category_tags);
            poi.cost_per_person = place.contains("price_level") ? 12.5 * place.at("price_level").get<int>() : 0.0;
            poi.description = place.value("formatted_address", "");
            poi.source_ref = place.at("place_id").get<std::string>();
            validate(poi);
            out.push_back(std::move(poi));
        } catch (const std::exception& e) {
            spdlog::warn("places: skipping unmappable record: {}", e.what());
        }
    }
    return out;
}

FixturePlacesProvider::FixturePlacesProvider(std::filesystem::path fixture_file) : file_(std::move(fixture_file)) {}

void FixturePlacesProvider::ensure_loaded() {
    std::call_once(loaded_, [this] {
        const auto doc = nlohmann::json::parse(files::read_all(file_));
        for (const auto& [query, records] : doc.at("queries").items()) {
            std::vector<Poi> pois;
            for (const auto& r : records) {
                auto poi = r.get<Poi>();
                validate(poi);
                pois.push_back(std::move(poi));
            }
            by_query_[text::fold(text::trim(query))] = std::move(pois);
        }
    });
}

std::vector<Poi> FixturePlacesProvider::lookup(const std::string& query, const GeoPoint& /*near*/) {
    ensure_loaded();
    const auto it = by_query_.find(text::fold(text::trim(query)));
    if (it == by_query_.end()) {
        return {};
    }
    return it->second;
}

std::vector<Poi> LivePlacesProvider::lookup(const std::string& query, const GeoPoint& near) {
    http::Request req;
    req.url = fmt::format("{}/maps/api/place/textsearch/json?query={}&location={},{}&radius={}&key={}",
                          config_.base_url, http::url_encode(query), near.lat, near.lon, config_.radius_m,
                          http::url_encode(config_.api_key));
    req.timeout_ms = config_.timeout_ms;
    const auto resp = http::send(req);
    if (resp.status < 200 || resp.status >= 300) {
        throw ProviderError(fmt::format("places provider returned HTTP {}", resp.status), true);
    }
    nlohmann::json payload;
    try {
        payload = nlohmann::json::parse(resp.body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("places provider sent malformed JSON: ") + e.what(), true);
    }
    return parse_places_response(payload, config_.destination);
}

}  // namespace itinera::catalog
