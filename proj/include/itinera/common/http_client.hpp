#pragma once

#include <map>
#include <string>

namespace itinera::http {

struct Response {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // lower-cased names
};

struct Request {
    std::string method = "GET";
    std::string url;  // absolute http(s) URL, query string included
    std::map<std::string, std::string> headers;
    std::string body;
    std::string content_type = "application/json";
    int timeout_ms = 10'000;
};

/// Performs one request. Transport failures (connect, timeout) throw ProviderError(retryable).
/// Non-2xx statuses are returned, not thrown.
Response send(const Request& request);

/// Percent-encodes a query-string component.
std::string url_encode(const std::string& value);

}  // namespace itinera::http
