#include "itinera/ingest/manifest.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"

#include <map>

namespace itinera::ingest {

Manifest build_manifest(std::vector<KnowledgeDocument> documents, std::vector<SkipEntry> skipped,
                        const ChunkingOptions& options) {
    Manifest m;
    std::vector<Chunk> all;
    for (const auto& doc : documents) {
        auto chunks = chunk(doc, options);
        all.insert(all.end(), std::make_move_iterator(chunks.begin()), std::make_move_iterator(chunks.end()));
    }
    m.chunks = dedup(all);
    m.documents = std::move(documents);
    m.skipped = std::move(skipped);
    return m;
}

Manifest merge_manifests(const Manifest& base, const Manifest& extra, const ChunkingOptions& options) {
    std::map<std::string, std::size_t> position;
    std::vector<KnowledgeDocument> docs;
    for (const auto* m : {&base, &extra}) {
        for (const auto& d : m->documents) {
            if (const auto it = position.find(d.doc_id); it != position.end()) {
                docs[it->second] = d;
            } else {
                position.emplace(d.doc_id, docs.size());
                docs.push_back(d);
            }
        }
    }
    auto skipped = base.skipped;
    skipped.insert(skipped.end(), extra.skipped.begin(), extra.skipped.end());
    return build_manifest(std::move(docs), std::move(skipped), options);
}

std::string serialize_manifest(const Manifest& m) {
    const nlohmann::json j{{"version", Manifest::kVersion},
                           {"documents", m.documents},
                           {"chunks", m.chunks},
                           {"skipped", m.skipped}};
    return j.dump(1) + "\n";
}

Manifest parse_manifest(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    if (j.value("version", 0) != Manifest::kVersion) {
        throw ValidationError("version", "unsupported manifest version");
    }
    Manifest m;
    j.at("documents").get_to(m.documents);
    j.at("chunks").get_to(m.chunks);
    j.at("skipped").get_to(m.skipped);
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    files::write_atomic(path, serialize_manifest(m));
}

Manifest read_manifest(const std::filesystem::path& path) {
    return parse_manifest(files::read_all(path));
}

}  // namespace itinera::ingest
