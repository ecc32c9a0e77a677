#include "itinera/ingest/chunker.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"

#include <unordered_set>

namespace itinera::ingest {

std::vector<Chunk> chunk(const KnowledgeDocument& doc, const ChunkingOptions& options) {
    if (options.max_tokens == 0) {
        throw ValidationError("max_tokens", "must be positive");
    }
    if (options.overlap >= options.max_tokens) {
        throw ValidationError("overlap", "must be smaller than max_tokens");
    }
    const auto tokens = text::split_whitespace(doc.body);
    const std::size_t stride = options.max_tokens - options.overlap;
    const std::map<std::string, std::string> metadata{
        {"source", std::string(to_string(doc.source))}, {"uri", doc.uri}, {"title", doc.title}, {"language", doc.language}};

    std::vector<Chunk> out;
    for (std::size_t start = 0, index = 0; start < tokens.size(); start += stride, ++index) {
        const std::size_t end = std::min(start + options.max_tokens, tokens.size());
        Chunk c;
        c.chunk_id = doc.doc_id + ":" + std::to_string(index);
        c.text = text::join({tokens.begin() + static_cast<std::ptrdiff_t>(start), tokens.begin() + static_cast<std::ptrdiff_t>(end)}, " ");
        c.token_count = end - start;
        c.metadata = metadata;
        out.push_back(std::move(c));
        if (end == tokens.size()) {
            break;
        }
    }
    return out;
}

std::vector<Chunk> dedup(const std::vector<Chunk>& chunks) {
    std::unordered_set<std::string> seen;
    std::vector<Chunk> out;
    for (const auto& c : chunks) {
        if (seen.insert(text::normalize_whitespace(c.text)).second) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace itinera::ingest
