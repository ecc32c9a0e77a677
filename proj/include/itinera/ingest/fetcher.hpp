#pragma once

#include "itinera/ingest/url.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace itinera::ingest {

struct FetchResponse {
    int status = 0;
    std::string body;
    std::string content_type;
    std::string location;  // redirect target, when present
    std::optional<std::int64_t> last_modified;  // epoch ms
};

/// Retrieves one URL. Transport failures throw ProviderError.
class Fetcher {
public:
    virtual ~Fetcher() = default;
    virtual FetchResponse fetch(const Url& url) = 0;
};

/// Serves a site snapshot from disk: `<root>/<authority>/<path>`, with `index.html` for
/// directory paths. Every response carries the same `last_modified` so runs are reproducible.
class FixtureSiteFetcher final : public Fetcher {
public:
    explicit FixtureSiteFetcher(std::filesystem::path root, std::int64_t last_modified_ms = 1'735'689'600'000)
        : root_(std::move(root)), last_modified_(last_modified_ms) {}

    FetchResponse fetch(const Url& url) override;

private:
    std::filesystem::path root_;
    std::int64_t last_modified_;
};

class HttpFetcher final : public Fetcher {
public:
    HttpFetcher(std::string user_agent, int timeout_ms) : user_agent_(std::move(user_agent)), timeout_ms_(timeout_ms) {}

    FetchResponse fetch(const Url& url) override;

private:
    std::string user_agent_;
    int timeout_ms_;
};

/// Content type guessed from a path extension.
std::string content_type_for(const std::filesystem::path& p);

}  // namespace itinera::ingest
