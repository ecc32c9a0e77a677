#pragma once

#include "itinera/ingest/document.hpp"

#include <filesystem>
#include <string>

namespace itinera::ingest {

/// One document per supported file (html, htm, txt, md), ordered by relative path.
/// Unreadable, binary, unsupported or empty files go to the skip report.
IngestResult ingest_directory(const std::filesystem::path& root);

/// Reads a static site export: either a directory of HTML pages or a JSON array of posts
/// shaped like the WordPress REST API (`link`, `title.rendered`, `content.rendered`, `modified_gmt`).
IngestResult ingest_site_export(const std::filesystem::path& dump);

struct EventsFeedConfig {
    bool enabled = false;
    std::string feed;  // file path or http(s) URL returning a JSON array of events
    int timeout_ms = 8'000;
};

/// Polling connector for the day-by-day events feed. Event records are
/// `{id, title, description, start, end, location, url}`; the schema is provisional.
class EventsFeedConnector {
public:
    explicit EventsFeedConnector(EventsFeedConfig config) : config_(std::move(config)) {}

    bool enabled() const { return config_.enabled; }
    /// Empty result with a single "disabled" skip entry when the connector is off.
    IngestResult poll() const;

private:
    EventsFeedConfig config_;
};

IngestResult parse_events_feed(const std::string& payload);

}  // namespace itinera::ingest
