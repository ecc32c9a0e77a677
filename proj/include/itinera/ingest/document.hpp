#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace itinera::ingest {

enum class Source { directory, crawl, site_export, events_feed };

std::string_view to_string(Source s);
Source source_from_string(std::string_view s);

struct KnowledgeDocument {
    std::string doc_id;
    Source source = Source::directory;
    std::string uri;
    std::string title;
    std::string body;
    std::string language;  // "it", "en" or "unknown"
    std::int64_t fetched_at = 0;  // epoch ms

    friend bool operator==(const KnowledgeDocument&, const KnowledgeDocument&) = default;
};

struct Chunk {
    std::string chunk_id;
    std::string text;
    std::size_t token_count = 0;
    std::map<std::string, std::string> metadata;  // source, uri, title, language

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// A source item that did not become a document, and why.
struct SkipEntry {
    std::string uri;
    std::string reason;
    int status = 0;  // HTTP status when the skip came from a fetch

    friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

struct IngestResult {
    std::vector<KnowledgeDocument> documents;
    std::vector<SkipEntry> skipped;
};

/// Stable across runs and machines for the same (source, uri).
std::string make_doc_id(Source source, std::string_view uri);

/// "it", "en" or "unknown" from function-word frequencies.
std::string detect_language(std::string_view body);

void to_json(nlohmann::json& j, const KnowledgeDocument& d);
void from_json(const nlohmann::json& j, KnowledgeDocument& d);
void to_json(nlohmann::json& j, const Chunk& c);
void from_json(const nlohmann::json& j, Chunk& c);
void to_json(nlohmann::json& j, const SkipEntry& s);
void from_json(const nlohmann::json& j, SkipEntry& s);

}  // namespace itinera::ingest
