#pragma once

#include "itinera/catalog/poi.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace itinera::catalog {

enum class UpsertResult { inserted, updated, unchanged };

/// In-memory POI store. Many concurrent readers, one writer at a time.
class Catalog {
public:
    Catalog() = default;
    Catalog(const Catalog&) = delete;
    Catalog& operator=(const Catalog&) = delete;

    UpsertResult upsert_poi(const Poi& poi);

    /// POIs at `destination` (case- and accent-insensitive) sharing at least one tag with `tags`
    /// (all POIs when `tags` is empty), ordered by overlap size desc then id asc.
    std::vector<Poi> find_pois(const std::string& destination, const std::set<std::string>& tags,
                               std::size_t limit) const;

    std::optional<Poi> get(const std::string& id) const;
    std::vector<Poi> all() const;
    std::size_t size() const;
    std::vector<std::string> destinations() const;
    std::set<std::string> tags(const std::string& destination = {}) const;

    /// Loads a JSON-lines file; each line is validated. Returns the number of records read.
    std::size_t load_jsonl(const std::filesystem::path& path);
    void save_jsonl(const std::filesystem::path& path) const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, Poi> pois_;
};

}  // namespace itinera::catalog
