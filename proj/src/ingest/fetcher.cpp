#include "itinera/ingest/fetcher.hpp"

#include "itinera/common/clock.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/http_client.hpp"
#include "itinera/common/text.hpp"

namespace itinera::ingest {

namespace fs = std::filesystem;

std::string content_type_for(const fs::path& p) {
    const auto ext = text::to_lower_ascii(p.extension().string());
    if (ext == ".html" || ext == ".htm") {
        return "text/html; charset=utf-8";
    }
    if (ext == ".md") {
        return "text/markdown; charset=utf-8";
    }
    if (ext == ".txt") {
        return "text/plain; charset=utf-8";
    }
    if (ext == ".json") {
        return "application/json";
    }
    return "application/octet-stream";
}

FetchResponse FixtureSiteFetcher::fetch(const Url& url) {
    std::string relative = url.path;
    if (relative.empty() || relative.back() == '/') {
        relative += "index.html";
    }
    // Dot segments are already removed by Url, so the path cannot escape the root.
    auto file = root_ / url.authority() / relative.substr(1);
    if (fs::is_directory(file)) {
        file /= "index.html";
    }
    FetchResponse resp;
    resp.last_modified = last_modified_;
    if (!fs::is_regular_file(file)) {
        resp.status = 404;
        return resp;
    }
    resp.status = 200;
    resp.body = files::read_all(file);
    resp.content_type = content_type_for(file);
    return resp;
}

FetchResponse HttpFetcher::fetch(const Url& url) {
    http::Request req;
    req.url = url.str();
    req.timeout_ms = timeout_ms_;
    req.headers["User-Agent"] = user_agent_;
    req.headers["Accept"] = "text/html,text/plain;q=0.9,*/*;q=0.1";
    const auto raw = http::send(req);
    FetchResponse resp;
    resp.status = raw.status;
    resp.body = raw.body;
    if (const auto it = raw.headers.find("content-type"); it != raw.headers.end()) {
        resp.content_type = it->second;
    }
    if (const auto it = raw.headers.find("location"); it != raw.headers.end()) {
        resp.location = it->second;
    }
    for (const char* header : {"last-modified", "date"}) {
        if (const auto it = raw.headers.find(header); it != raw.headers.end()) {
            resp.last_modified = parse_http_date(it->second);
            if (resp.last_modified) {
                break;
            }
        }
    }
    return resp;
}

}  // namespace itinera::ingest
