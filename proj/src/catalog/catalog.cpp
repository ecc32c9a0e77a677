#include "itinera/catalog/catalog.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/text.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <json.hpp>

namespace itinera::catalog {

UpsertResult Catalog::upsert_poi(const Poi& poi) {
    validate(poi);
    std::unique_lock lock(mutex_);
    auto [it, inserted] = pois_.try_emplace(poi.id, poi);
    if (inserted) {
        return UpsertResult::inserted;
    }
    if (it->second == poi) {
        return UpsertResult::unchanged;
    }
    it->second = poi;
    return UpsertResult::updated;
}

std::vector<Poi> Catalog::find_pois(const std::string& destination, const std::set<std::string>& tags,
                                    std::size_t limit) const {
    const std::string wanted = text::fold(text::trim(destination));
    std::vector<std::pair<std::size_t, const Poi*>> matches;
    std::shared_lock lock(mutex_);
    for (const auto& [id, poi] : pois_) {
        if (text::fold(text::trim(poi.destination)) != wanted) {
            continue;
        }
        std::size_t overlap = 0;
        for (const auto& tag : tags) {
            overlap += poi.category_tags.count(tag);
        }
        if (!tags.empty() && overlap == 0) {
            continue;
        }
        matches.emplace_back(overlap, &poi);
    }
    std::sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second->id < b.second->id;
    });
    std::vector<Poi> out;
    for (std::size_t i = 0; i < matches.size() && i < limit; ++i) {
        out.push_back(*matches[i].second);
    }
    return out;
}

std::optional<Poi> Catalog::get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    const auto it = pois_.find(id);
    if (it == pois_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<Poi> Catalog::all() const {
    std::shared_lock lock(mutex_);
    std::vector<Poi> out;
    out.reserve(pois_.size());
    for (const auto& [id, poi] : pois_) {
        out.push_back(poi);
    }
    return out;
}

std::size_t Catalog::size() const {
    std::shared_lock lock(mutex_);
    return pois_.size();
}

std::vector<std::string> Catalog::destinations() const {
    std::shared_lock lock(mutex_);
    std::set<std::string> names;
    for (const auto& [id, poi] : pois_) {
        if (!poi.destination.empty()) {
            names.insert(poi.destination);
        }
    }
    return {names.begin(), names.end()};
}

std::set<std::string> Catalog::tags(const std::string& destination) const {
    const std::string wanted = text::fold(destination);
    std::shared_lock lock(mutex_);
    std::set<std::string> out;
    for (const auto& [id, poi] : pois_) {
        if (destination.empty() || text::fold(poi.destination) == wanted) {
            out.insert(poi.category_tags.begin(), poi.category_tags.end());
        }
    }
    return out;
}

std::size_t Catalog::load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open catalog " + path.string());
    }
    std::vector<Poi> loaded;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        Poi poi;
        try {
            nlohmann::json::parse(line).get_to(poi);
            validate(poi);
        } catch (const ValidationError& e) {
            throw ValidationError(e.field(), path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("line", path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        loaded.push_back(std::move(poi));
    }
    for (const auto& poi : loaded) {
        upsert_poi(poi);
    }
    return loaded.size();
}

void Catalog::save_jsonl(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& poi : all()) {
        out += nlohmann::json(poi).dump();
        out += '\n';
    }
    files::write_atomic(path, out);
}

}  // namespace itinera::catalog
