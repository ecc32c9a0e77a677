#pragma once

#include "itinera/catalog/geo.hpp"
#include "itinera/catalog/poi.hpp"

#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace itinera::catalog {

/// Square, symmetric, zero-diagonal travel times in minutes between POIs.
class TravelMatrix {
public:
    TravelMatrix() = default;
    TravelMatrix(std::vector<std::string> ids, std::vector<int> minutes, TravelMode mode);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    TravelMode mode() const { return mode_; }

    int at(std::size_t i, std::size_t j) const { return minutes_[i * ids_.size() + j]; }
    std::optional<std::size_t> index_of(const std::string& id) const;
    /// Minutes between two POI ids; throws if either is not covered.
    int between(const std::string& a, const std::string& b) const;
    bool covers(const std::string& id) const { return index_.contains(id); }

private:
    std::vector<std::string> ids_;
    std::vector<int> minutes_;
    TravelMode mode_ = TravelMode::walk;
    std::unordered_map<std::string, std::size_t> index_;
};

TravelMatrix build_matrix(std::span<const Poi> pois, TravelMode mode, const TravelSpeeds& speeds = {});

void to_json(nlohmann::json& j, const TravelMatrix& m);
void from_json(const nlohmann::json& j, TravelMatrix& m);

}  // namespace itinera::catalog
