#include "itinera/catalog/travel_matrix.hpp"

#include "itinera/common/errors.hpp"

#include <json.hpp>

namespace itinera::catalog {

TravelMatrix::TravelMatrix(std::vector<std::string> ids, std::vector<int> minutes, TravelMode mode)
    : ids_(std::move(ids)), minutes_(std::move(minutes)), mode_(mode) {
    const std::size_t n = ids_.size();
    if (minutes_.size() != n * n) {
        throw ValidationError("matrix", "expected " + std::to_string(n * n) + " entries");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!index_.emplace(ids_[i], i).second) {
            throw ValidationError("matrix", "duplicate id " + ids_[i]);
        }
        for (std::size_t j = 0; j < n; ++j) {
            const int v = minutes_[i * n + j];
            if (v < 0) {
                throw ValidationError("matrix", "negative travel time");
            }
            if (i == j && v != 0) {
                throw ValidationError("matrix", "non-zero diagonal at " + ids_[i]);
            }
            if (v != minutes_[j * n + i]) {
                throw ValidationError("matrix", "asymmetric entry " + ids_[i] + "/" + ids_[j]);
            }
        }
    }
}

std::optional<std::size_t> TravelMatrix::index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

int TravelMatrix::between(const std::string& a, const std::string& b) const {
    const auto i = index_of(a);
    const auto j = index_of(b);
    if (!i || !j) {
        throw ValidationError("matrix", "no travel time for " + a + " -> " + b);
    }
    return at(*i, *j);
}

TravelMatrix build_matrix(std::span<const Poi> pois, TravelMode mode, const TravelSpeeds& speeds) {
    if (pois.empty()) {
        throw ValidationError("pois", "travel matrix needs at least one POI");
    }
    const std::size_t n = pois.size();
    std::vector<std::string> ids;
    ids.reserve(n);
    for (const auto& p : pois) {
        ids.push_back(p.id);
    }
    std::vector<int> minutes(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const int t = travel_time(pois[i].position, pois[j].position, mode, speeds);
            minutes[i * n + j] = t;
            minutes[j * n + i] = t;
        }
    }
    return TravelMatrix(std::move(ids), std::move(minutes), mode);
}

void to_json(nlohmann::json& j, const TravelMatrix& m) {
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto row = nlohmann::json::array();
        for (std::size_t k = 0; k < m.size(); ++k) {
            row.push_back(m.at(i, k));
        }
        rows.push_back(std::move(row));
    }
    j = nlohmann::json{{"ids", m.ids()}, {"minutes", std::move(rows)}, {"mode", to_string(m.mode())}};
}

void from_json(const nlohmann::json& j, TravelMatrix& m) {
    auto ids = j.at("ids").get<std::vector<std::string>>();
    std::vector<int> flat;
    for (const auto& row : j.at("minutes")) {
        if (row.size() != ids.size()) {
            throw ValidationError("matrix", "row length mismatch");
        }
        for (const auto& v : row) {
            flat.push_back(v.get<int>());
        }
    }
    m = TravelMatrix(std::move(ids), std::move(flat), travel_mode_from_string(j.value("mode", "walk")));
}

}  // namespace itinera::catalog
