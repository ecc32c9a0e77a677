#pragma once

#include "itinera/ingest/document.hpp"

#include <vector>

namespace itinera::ingest {

struct ChunkingOptions {
    std::size_t max_tokens = 400;
    std::size_t overlap = 80;
};

/// Sliding window over whitespace tokens with stride `max_tokens - overlap`.
/// Throws ValidationError unless 0 <= overlap < max_tokens.
std::vector<Chunk> chunk(const KnowledgeDocument& doc, const ChunkingOptions& options = {});

/// Keeps the first chunk of every whitespace-normalized text, preserving order.
std::vector<Chunk> dedup(const std::vector<Chunk>& chunks);

}  // namespace itinera::ingest
