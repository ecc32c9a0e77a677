#include "itinera/retrieval/vector_index.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/ingest/document.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fmt/format.h>
#include <mutex>

namespace itinera::retrieval {

namespace {

std::vector<double> unit_of(const std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    std::vector<double> out(v.size(), 0.0);
    if (norm == 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i] / norm;
    }
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

constexpr char kMagic[8] = {'I', 'T', 'I', 'D', 'X', '\0', '\0', '\0'};

class Writer {
public:
    void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::string& data() { return out_; }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string& in) : in_(in) {}
    void raw(void* p, std::size_t n) {
        if (pos_ + n > in_.size()) {
            throw ValidationError("snapshot", "truncated index snapshot");
        }
        std::memcpy(p, in_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    std::string str() {
        const auto n = u32();
        if (pos_ + n > in_.size()) {
            throw ValidationError("snapshot", "truncated index snapshot");
        }
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    const std::string& in_;
    std::size_t pos_ = 0;
};

}  // namespace

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw ValidationError("dim", "index dimension must be positive");
    }
}

VectorIndex::VectorIndex(VectorIndex&& other) noexcept : dim_(other.dim_) {
    std::unique_lock lock(other.mutex_);
    slots_ = std::move(other.slots_);
    by_id_ = std::move(other.by_id_);
}

std::size_t VectorIndex::add(std::vector<IndexEntry> entries) {
    for (const auto& e : entries) {
        if (e.chunk_id.empty()) {
            throw ValidationError("chunk_id", "empty chunk id");
        }
        validate(e.vector);
        if (e.vector.dim() != dim_) {
            throw ValidationError("dim", fmt::format("expected {} dims, got {}", dim_, e.vector.dim()));
        }
    }
    std::vector<Slot> prepared;
    prepared.reserve(entries.size());
    for (auto& e : entries) {
        auto unit = unit_of(e.vector.values);
        prepared.push_back(Slot{std::move(e), std::move(unit)});
    }
    std::unique_lock lock(mutex_);
    for (auto& slot : prepared) {
        const auto it = by_id_.find(slot.entry.chunk_id);
        if (it != by_id_.end()) {
            slots_[it->second] = std::move(slot);
        } else {
            by_id_.emplace(slot.entry.chunk_id, slots_.size());
            slots_.push_back(std::move(slot));
        }
    }
    return prepared.size();
}

std::vector<RetrievalHit> VectorIndex::query_vector(const EmbeddingVector& query, std::size_t k,
                                                    const MetadataFilter& filter) const {
    if (k == 0) {
        throw ValidationError("k", "k must be at least 1");
    }
    validate(query);
    if (query.dim() != dim_) {
        throw ValidationError("dim", fmt::format("expected {} dims, got {}", dim_, query.dim()));
    }
    const auto q = unit_of(query.values);
    std::shared_lock lock(mutex_);
    std::vector<std::pair<double, const Slot*>> scored;
    scored.reserve(slots_.size());
    for (const auto& slot : slots_) {
        if (filter && !filter(slot.entry.metadata)) {
            continue;
        }
        scored.emplace_back(dot(q, slot.unit), &slot);
    }
    const auto cmp = [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second->entry.chunk_id < b.second->entry.chunk_id;
    };
    const auto take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), cmp);
    std::vector<RetrievalHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& e = scored[i].second->entry;
        hits.push_back(RetrievalHit{e.chunk_id, std::clamp(scored[i].first, -1.0, 1.0), e.metadata, e.text});
    }
    return hits;
}

std::vector<RetrievalHit> VectorIndex::query(const std::string& text, std::size_t k, Embedder& embedder,
                                             const MetadataFilter& filter) const {
    if (size() == 0) {
        return {};
    }
    const auto vectors = embedder.embed({text});
    return query_vector(vectors.at(0), k, filter);
}

std::size_t VectorIndex::size() const {
    std::shared_lock lock(mutex_);
    return slots_.size();
}

std::vector<IndexEntry> VectorIndex::entries() const {
    std::shared_lock lock(mutex_);
    std::vector<IndexEntry> out;
    out.reserve(slots_.size());
    for (const auto& s : slots_) {
        out.push_back(s.entry);
    }
    return out;
}

void VectorIndex::save(const std::filesystem::path& path) const {
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.u32(kSnapshotVersion);
    w.u32(static_cast<std::uint32_t>(dim_));
    std::shared_lock lock(mutex_);
    w.u64(slots_.size());
    for (const auto& slot : slots_) {
        const auto& e = slot.entry;
        w.str(e.chunk_id);
        w.str(e.text);
        w.u32(static_cast<std::uint32_t>(e.metadata.size()));
        for (const auto& [key, value] : e.metadata) {
            w.str(key);
            w.str(value);
        }
        w.raw(e.vector.values.data(), e.vector.values.size() * sizeof(double));
    }
    lock.unlock();
    files::write_atomic(path, w.data());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    const auto bytes = files::read_all(path);
    Reader r(bytes);
    char magic[sizeof kMagic];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ValidationError("snapshot", "not an index snapshot");
    }
    const auto version = r.u32();
    if (version != kSnapshotVersion) {
        throw ValidationError("version", fmt::format("unsupported index snapshot version {}", version));
    }
    const auto dim = r.u32();
    VectorIndex index(dim);
    const auto count = r.u64();
    std::vector<IndexEntry> entries;
    entries.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexEntry e;
        e.chunk_id = r.str();
        e.text = r.str();
        const auto meta = r.u32();
        for (std::uint32_t m = 0; m < meta; ++m) {
            auto key = r.str();
            e.metadata[key] = r.str();
        }
        e.vector.values.resize(dim);
        r.raw(e.vector.values.data(), dim * sizeof(double));
        entries.push_back(std::move(e));
    }
    if (!r.done()) {
        throw ValidationError("snapshot", "trailing bytes in index snapshot");
    }
    index.add(std::move(entries));
    return index;
}

std::size_t index_chunks(VectorIndex& index, Embedder& embedder, const std::vector<ingest::Chunk>& chunks,
                         std::size_t batch_size) {
    std::size_t added = 0;
    batch_size = std::max<std::size_t>(1, batch_size);
    for (std::size_t start = 0; start < chunks.size(); start += batch_size) {
        const auto end = std::min(chunks.size(), start + batch_size);
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) {
            texts.push_back(chunks[i].text);
        }
        auto vectors = embedder.embed(texts);
        std::vector<IndexEntry> entries;
        for (std::size_t i = start; i < end; ++i) {
            entries.push_back(IndexEntry{chunks[i].chunk_id, std::move(vectors[i - start]), chunks[i].metadata,
                                         chunks[i].text});
        }
        added += index.add(std::move(entries));
    }
    return added;
}

}  // namespace itinera::retrieval
