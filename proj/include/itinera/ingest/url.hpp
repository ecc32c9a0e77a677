#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace itinera::ingest {

/// Absolute http(s) URL in normalized form: lower-case scheme and host, default port
/// dropped, dot segments removed, fragment discarded.
struct Url {
    std::string scheme;
    std::string host;
    int port = 0;  // 0 = scheme default
    std::string path = "/";
    std::string query;

    static std::optional<Url> parse(std::string_view s);

    /// Resolves a reference (absolute, scheme-relative, absolute-path or relative) against this URL.
    std::optional<Url> resolve(std::string_view reference) const;

    /// host[:port], the unit of politeness and of crawl scope.
    std::string authority() const;
    std::string origin() const;
    std::string path_and_query() const;
    std::string str() const;

    friend bool operator==(const Url&, const Url&) = default;
};

}  // namespace itinera::ingest
