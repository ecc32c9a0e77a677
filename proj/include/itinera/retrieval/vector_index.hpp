#pragma once

#include "itinera/retrieval/embedding.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

namespace itinera::ingest {
struct Chunk;
}

namespace itinera::retrieval {

using Metadata = std::map<std::string, std::string>;

struct IndexEntry {
    std::string chunk_id;
    EmbeddingVector vector;
    Metadata metadata;
    std::string text;

    friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct RetrievalHit {
    std::string chunk_id;
    double score = 0.0;
    Metadata metadata;
    std::string text;
};

using MetadataFilter = std::function<bool(const Metadata&)>;

/// Exact flat cosine index. Queries share a reader lock; add takes the writer lock.
class VectorIndex {
public:
    static constexpr std::uint32_t kSnapshotVersion = 1;

    explicit VectorIndex(std::size_t dim);
    VectorIndex(VectorIndex&& other) noexcept;

    /// Returns how many entries were added or replaced. Validates the whole batch first.
    std::size_t add(std::vector<IndexEntry> entries);

    std::vector<RetrievalHit> query_vector(const EmbeddingVector& query, std::size_t k,
                                           const MetadataFilter& filter = {}) const;
    std::vector<RetrievalHit> query(const std::string& text, std::size_t k, Embedder& embedder,
                                    const MetadataFilter& filter = {}) const;

    std::size_t size() const;
    std::size_t dim() const { return dim_; }
    std::vector<IndexEntry> entries() const;

    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

private:
    struct Slot {
        IndexEntry entry;
        std::vector<double> unit;
    };

    std::size_t dim_;
    mutable std::shared_mutex mutex_;
    std::vector<Slot> slots_;
    std::map<std::string, std::size_t> by_id_;
};

/// Embeds chunk texts in batches and adds them. Returns the count added.
std::size_t index_chunks(VectorIndex& index, Embedder& embedder, const std::vector<ingest::Chunk>& chunks,
                         std::size_t batch_size = 64);

}  // namespace itinera::retrieval
