#pragma once

#include "itinera/common/clock.hpp"
#include "itinera/ingest/document.hpp"
#include "itinera/ingest/fetcher.hpp"

#include <string>
#include <vector>

namespace itinera::ingest {

struct CrawlOptions {
    std::size_t max_pages = 50;
    std::size_t max_depth = 3;
    std::int64_t delay_ms = 1000;  // minimum spacing between requests to one host
    std::string user_agent = "itinera-crawler/1.0";
    std::size_t workers = 1;  // concurrent fetches across distinct hosts
    bool respect_robots = true;
};

struct RequestLogEntry {
    std::string url;
    std::string host;
    std::int64_t at_ms = 0;
    int status = 0;  // 0 for transport failure
};

struct CrawlResult {
    std::vector<KnowledgeDocument> documents;
    std::vector<SkipEntry> skipped;
    std::vector<RequestLogEntry> requests;  // in issue order
};

/// One-off breadth-first crawl restricted to the seed hosts. Stops after `max_pages`
/// successful page fetches or when the frontier beyond `max_depth` is exhausted.
CrawlResult crawl(const std::vector<std::string>& seed_urls, const CrawlOptions& options, Fetcher& fetcher,
                  Clock& clock);

void to_json(nlohmann::json& j, const RequestLogEntry& e);

}  // namespace itinera::ingest
