#pragma once

#include "itinera/ingest/chunker.hpp"
#include "itinera/ingest/document.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace itinera::ingest {

/// Output of one supervised ingestion run, consumed by the index builder.
struct Manifest {
    static constexpr int kVersion = 1;

    std::vector<KnowledgeDocument> documents;
    std::vector<Chunk> chunks;
    std::vector<SkipEntry> skipped;
};

/// Chunks every document and removes duplicate chunk texts across the whole run.
Manifest build_manifest(std::vector<KnowledgeDocument> documents, std::vector<SkipEntry> skipped,
                        const ChunkingOptions& options);

/// Merges `extra` into `base`, replacing documents with the same doc_id.
Manifest merge_manifests(const Manifest& base, const Manifest& extra, const ChunkingOptions& options);

std::string serialize_manifest(const Manifest& m);
Manifest parse_manifest(const std::string& json_text);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace itinera::ingest
