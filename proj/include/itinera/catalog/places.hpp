#pragma once

#include "itinera/catalog/poi.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <json.hpp>
#include <string>
#include <vector>

namespace itinera::catalog {

/// Source of place records from an external directory service.
class PlacesProvider {
public:
    virtual ~PlacesProvider() = default;
    virtual std::vector<Poi> lookup(const std::string& query, const GeoPoint& near) = 0;
};

/// Canned results keyed by query text (case/accent-insensitive). The fixture file is
/// `{"destination": "...", "queries": {"museo": [<Poi>, ...], ...}}` and is parsed once.
class FixturePlacesProvider final : public PlacesProvider {
public:
    explicit FixturePlacesProvider(std::filesystem::path fixture_file);
    std::vector<Poi> lookup(const std::string& query, const GeoPoint& near) override;

private:
    void ensure_loaded();

    std::filesystem::path file_;
    std::once_flag loaded_;
    std::map<std::string, std::vector<Poi>> by_query_;
};

struct LivePlacesConfig {
    std::string base_url = "https://maps.googleapis.com";
    std::string api_key;
    std::string destination;  // copied into every mapped Poi
    int radius_m = 15'000;
    int timeout_ms = 8'000;
};

/// Text-search client for a Google-Places-shaped HTTP API.
class LivePlacesProvider final : public PlacesProvider {
public:
    explicit LivePlacesProvider(LivePlacesConfig config) : config_(std::move(config)) {}
    std::vector<Poi> lookup(const std::string& query, const GeoPoint& near) override;

private:
    LivePlacesConfig config_;
};

/// Maps a text-search response body to Poi records. Records missing an id, a name or a
/// location are skipped with a warning; the rest are normalized and validated.
std::vector<Poi> parse_places_response(const nlohmann::json& payload, const std::string& destination);

}  // namespace itinera::catalog
