#include "itinera/ingest/sources.hpp"

#include "itinera/common/clock.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/http_client.hpp"
#include "itinera/common/text.hpp"
#include "itinera/ingest/html_text.hpp"

#include <algorithm>
#include <chrono>
#include <json.hpp>
#include <optional>

namespace itinera::ingest {

namespace fs = std::filesystem;

namespace {

std::optional<ContentKind> kind_for(const fs::path& p) {
    const auto ext = text::to_lower_ascii(p.extension().string());
    if (ext == ".html" || ext == ".htm") {
        return ContentKind::html;
    }
    if (ext == ".txt" || ext == ".text") {
        return ContentKind::plain_text;
    }
    if (ext == ".md" || ext == ".markdown") {
        return ContentKind::markdown;
    }
    return std::nullopt;
}

std::int64_t mtime_ms(const fs::path& p) {
    const auto sys = std::chrono::file_clock::to_sys(fs::last_write_time(p));
    return std::chrono::duration_cast<std::chrono::milliseconds>(sys.time_since_epoch()).count();
}

bool is_hidden(const fs::path& relative) {
    return std::any_of(relative.begin(), relative.end(),
                       [](const fs::path& part) { return part.string().starts_with("."); });
}

std::vector<fs::path> sorted_files(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied)) {
        if (entry.is_regular_file() && !is_hidden(fs::relative(entry.path(), root))) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end(), [&](const fs::path& a, const fs::path& b) {
        return fs::relative(a, root).generic_string() < fs::relative(b, root).generic_string();
    });
    return out;
}

// Shared per-file path for directory and HTML-dump ingestion.
void ingest_file(const fs::path& file, const std::string& uri, Source source, IngestResult& result) {
    const auto kind = kind_for(file);
    if (!kind) {
        const auto ext = text::to_lower_ascii(file.extension().string());
        result.skipped.push_back({uri, ext == ".pdf" ? "unsupported: binary pdf (extract text first)" : "unsupported type"});
        return;
    }
    std::string raw;
    try {
        raw = files::read_all(file);
    } catch (const std::exception& e) {
        result.skipped.push_back({uri, std::string("unreadable: ") + e.what()});
        return;
    }
    if (raw.find('\0') != std::string::npos) {
        result.skipped.push_back({uri, "binary content"});
        return;
    }
    const auto extracted = extract_text(raw, *kind, uri);
    if (!extracted) {
        result.skipped.push_back({uri, "empty"});
        return;
    }
    KnowledgeDocument doc;
    doc.source = source;
    doc.uri = uri;
    doc.doc_id = make_doc_id(source, uri);
    doc.title = extracted->title;
    doc.body = extracted->body;
    doc.language = detect_language(doc.body);
    doc.fetched_at = mtime_ms(file);
    result.documents.push_back(std::move(doc));
}

std::string strip_markup(const std::string& html) {
    const auto extracted = extract_text(html, ContentKind::html, "");
    return extracted ? text::normalize_whitespace(extracted->body) : std::string{};
}

}  // namespace

IngestResult ingest_directory(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw ValidationError("path", root.string() + " is not a readable directory");
    }
    IngestResult result;
    for (const auto& file : sorted_files(root)) {
        ingest_file(file, fs::relative(file, root).generic_string(), Source::directory, result);
    }
    return result;
}

IngestResult ingest_site_export(const fs::path& dump) {
    IngestResult result;
    if (fs::is_directory(dump)) {
        for (const auto& file : sorted_files(dump)) {
            const auto uri = fs::relative(file, dump).generic_string();
            if (kind_for(file) == ContentKind::html) {
                ingest_file(file, uri, Source::site_export, result);
            } else {
                result.skipped.push_back({uri, "unsupported type"});
            }
        }
        return result;
    }

    const auto posts = nlohmann::json::parse(files::read_all(dump));
    if (!posts.is_array()) {
        throw ValidationError("dump", "expected a JSON array of posts");
    }
    for (const auto& post : posts) {
        const std::string uri = post.value("link", post.contains("id") ? "post:" + post.at("id").dump() : std::string{});
        if (uri.empty()) {
            result.skipped.push_back({"<unknown>", "post without link or id"});
            continue;
        }
        const auto rendered = [&](const char* key) -> std::string {
            if (!post.contains(key)) {
                return {};
            }
            const auto& v = post.at(key);
            return v.is_object() ? v.value("rendered", "") : v.is_string() ? v.get<std::string>() : std::string{};
        };
        const auto extracted = extract_text(rendered("content"), ContentKind::html, uri);
        if (!extracted) {
            result.skipped.push_back({uri, "empty"});
            continue;
        }
        KnowledgeDocument doc;
        doc.source = Source::site_export;
        doc.uri = uri;
        doc.doc_id = make_doc_id(doc.source, uri);
        doc.title = strip_markup(rendered("title"));
        if (doc.title.empty()) {
            doc.title = extracted->title;
        }
        doc.body = extracted->body;
        doc.language = detect_language(doc.body);
        doc.fetched_at = parse_timestamp(post.value("modified_gmt", "")).value_or(0);
        result.documents.push_back(std::move(doc));
    }
    return result;
}

IngestResult parse_events_feed(const std::string& payload) {
    IngestResult result;
    const auto events = nlohmann::json::parse(payload);
    if (!events.is_array()) {
        throw ValidationError("feed", "expected a JSON array of events");
    }
    for (const auto& ev : events) {
        const std::string id = ev.contains("id") ? (ev.at("id").is_string() ? ev.at("id").get<std::string>() : ev.at("id").dump()) : "";
        const std::string uri = ev.value("url", id.empty() ? std::string{} : "event:" + id);
        const std::string title = ev.value("title", "");
        if (uri.empty() || title.empty()) {
            result.skipped.push_back({uri.empty() ? "<unknown>" : uri, "event without id or title"});
            continue;
        }
        std::vector<std::string> lines{title};
        if (const auto desc = ev.value("description", ""); !desc.empty()) {
            lines.push_back(desc);
        }
        const auto start = ev.value("start", "");
        const auto end = ev.value("end", "");
        if (!start.empty()) {
            lines.push_back(end.empty() ? "When: " + start : "When: " + start + " - " + end);
        }
        if (const auto where = ev.value("location", ""); !where.empty()) {
            lines.push_back("Where: " + where);
        }
        KnowledgeDocument doc;
        doc.source = Source::events_feed;
        doc.uri = uri;
        doc.doc_id = make_doc_id(doc.source, uri);
        doc.title = text::normalize_whitespace(title);
        std::vector<std::string> cleaned;
        for (const auto& l : lines) {
            if (auto n = text::normalize_whitespace(l); !n.empty()) {
                cleaned.push_back(std::move(n));
            }
        }
        doc.body = text::join(cleaned, "\n");
        doc.language = detect_language(doc.body);
        doc.fetched_at = parse_timestamp(ev.value("updated", start)).value_or(0);
        result.documents.push_back(std::move(doc));
    }
    return result;
}

IngestResult EventsFeedConnector::poll() const {
    if (!config_.enabled) {
        IngestResult r;
        r.skipped.push_back({config_.feed, "events feed disabled"});
        return r;
    }
    std::string payload;
    if (config_.feed.starts_with("http://") || config_.feed.starts_with("https://")) {
        http::Request req;
        req.url = config_.feed;
        req.timeout_ms = config_.timeout_ms;
        const auto resp = http::send(req);
        if (resp.status != 200) {
            IngestResult r;
            r.skipped.push_back({config_.feed, "fetch failed", resp.status});
            return r;
        }
        payload = resp.body;
    } else {
        payload = files::read_all(config_.feed);
    }
    return parse_events_feed(payload);
}

}  // namespace itinera::ingest
