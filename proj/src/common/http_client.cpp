#include "itinera/common/http_client.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"

#include <httplib.h>

#include <fmt/format.h>

namespace itinera::http {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path + query
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ProviderError("malformed url: " + url, false);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Response send(const Request& request) {
    const auto parts = split_url(request.url);
    httplib::Client client(parts.origin);
    const auto timeout_s = request.timeout_ms / 1000;
    const auto timeout_us = (request.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(timeout_s, timeout_us);
    client.set_read_timeout(timeout_s, timeout_us);
    client.set_write_timeout(timeout_s, timeout_us);
    client.set_follow_location(false);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) {
        headers.emplace(k, v);
    }

    httplib::Result result;
    if (request.method == "GET") {
        result = client.Get(parts.path, headers);
    } else if (request.method == "POST") {
        result = client.Post(parts.path, headers, request.body, request.content_type);
    } else {
        throw ProviderError("unsupported method " + request.method, false);
    }
    if (!result) {
        throw ProviderError(fmt::format("{} {} failed: {}", request.method, request.url,
                                        httplib::to_string(result.error())),
                            true);
    }
    Response response;
    response.status = result->status;
    response.body = result->body;
    for (const auto& [k, v] : result->headers) {
        response.headers[text::to_lower_ascii(k)] = v;
    }
    return response;
}

std::string url_encode(const std::string& value) {
    std::string out;
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out += fmt::format("%{:02X}", c);
        }
    }
    return out;
}

}  // namespace itinera::http
