#include "itinera/ingest/document.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"

#include <set>

namespace itinera::ingest {

std::string_view to_string(Source s) {
    switch (s) {
        case Source::directory: return "directory";
        case Source::crawl: return "crawl";
        case Source::site_export: return "site_export";
        case Source::events_feed: return "events_feed";
    }
    return "directory";
}

Source source_from_string(std::string_view s) {
    if (s == "directory") return Source::directory;
    if (s == "crawl") return Source::crawl;
    if (s == "site_export") return Source::site_export;
    if (s == "events_feed") return Source::events_feed;
    throw ValidationError("source", "unknown source '" + std::string(s) + "'");
}

std::string make_doc_id(Source source, std::string_view uri) {
    std::string key(to_string(source));
    key.push_back('\n');
    key.append(uri);
    return text::hex64(text::fnv1a64(key));
}

std::string detect_language(std::string_view body) {
    static const std::set<std::string> italian{"il", "lo", "la", "gli", "le", "di", "che", "e", "per", "del", "della",
                                               "un", "una", "con", "sono", "nel", "alla", "dei", "delle", "si"};
    static const std::set<std::string> english{"the", "and", "of", "to", "is", "in", "for", "with", "on", "are",
                                               "this", "that", "from", "by", "it", "an", "be", "at"};
    int it = 0;
    int en = 0;
    for (const auto& w : text::words(body)) {
        it += italian.count(w) ? 1 : 0;
        en += english.count(w) ? 1 : 0;
    }
    if (it == en) {
        return "unknown";
    }
    return it > en ? "it" : "en";
}

void to_json(nlohmann::json& j, const KnowledgeDocument& d) {
    j = nlohmann::json{{"doc_id", d.doc_id}, {"source", to_string(d.source)}, {"uri", d.uri},
                       {"title", d.title},   {"body", d.body},               {"language", d.language},
                       {"fetched_at", d.fetched_at}};
}

void from_json(const nlohmann::json& j, KnowledgeDocument& d) {
    j.at("doc_id").get_to(d.doc_id);
    d.source = source_from_string(j.at("source").get<std::string>());
    j.at("uri").get_to(d.uri);
    j.at("title").get_to(d.title);
    j.at("body").get_to(d.body);
    d.language = j.value("language", "unknown");
    d.fetched_at = j.value("fetched_at", std::int64_t{0});
}

void to_json(nlohmann::json& j, const Chunk& c) {
    j = nlohmann::json{{"chunk_id", c.chunk_id}, {"text", c.text}, {"token_count", c.token_count}, {"metadata", c.metadata}};
}

void from_json(const nlohmann::json& j, Chunk& c) {
    j.at("chunk_id").get_to(c.chunk_id);
    j.at("text").get_to(c.text);
    j.at("token_count").get_to(c.token_count);
    c.metadata = j.value("metadata", std::map<std::string, std::string>{});
}

void to_json(nlohmann::json& j, const SkipEntry& s) {
    j = nlohmann::json{{"uri", s.uri}, {"reason", s.reason}, {"status", s.status}};
}

void from_json(const nlohmann::json& j, SkipEntry& s) {
    j.at("uri").get_to(s.uri);
    j.at("reason").get_to(s.reason);
    s.status = j.value("status", 0);
}

}  // namespace itinera::ingest
