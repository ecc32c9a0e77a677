#include "itinera/ingest/url.hpp"

#include "itinera/common/text.hpp"

#include <charconv>
#include <vector>

namespace itinera::ingest {

namespace {

std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string> out;
    const auto parts = text::split(path, '/');
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& seg = parts[i];
        if (seg == ".") {
            continue;
        }
        if (seg == "..") {
            if (out.size() > 1) {
                out.pop_back();
            }
            continue;
        }
        out.push_back(seg);
    }
    std::string joined = text::join(out, "/");
    if (joined.empty() || joined.front() != '/') {
        joined.insert(joined.begin(), '/');
    }
    // "a/b/." and "a/b/.." keep their trailing slash.
    if (!parts.empty() && (parts.back() == "." || parts.back() == "..") && joined.back() != '/') {
        joined.push_back('/');
    }
    return joined;
}

int default_port(const std::string& scheme) {
    return scheme == "https" ? 443 : 80;
}

}  // namespace

std::optional<Url> Url::parse(std::string_view s) {
    s = text::trim(s);
    const auto scheme_end = s.find("://");
    if (scheme_end == std::string_view::npos) {
        return std::nullopt;
    }
    Url url;
    url.scheme = text::to_lower_ascii(s.substr(0, scheme_end));
    if (url.scheme != "http" && url.scheme != "https") {
        return std::nullopt;
    }
    auto rest = s.substr(scheme_end + 3);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
        rest = rest.substr(0, hash);
    }
    const auto path_start = rest.find_first_of("/?");
    auto authority = rest.substr(0, path_start);
    rest = path_start == std::string_view::npos ? std::string_view{} : rest.substr(path_start);
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority = authority.substr(at + 1);
    }
    if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        int port = 0;
        const auto digits = authority.substr(colon + 1);
        const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), port);
        if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || port <= 0 || port > 65535) {
            return std::nullopt;
        }
        url.port = port == default_port(url.scheme) ? 0 : port;
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) {
        return std::nullopt;
    }
    url.host = text::to_lower_ascii(authority);
    const auto q = rest.find('?');
    url.path = remove_dot_segments(q == std::string_view::npos ? rest : rest.substr(0, q));
    if (q != std::string_view::npos) {
        url.query = std::string(rest.substr(q + 1));
    }
    return url;
}

std::optional<Url> Url::resolve(std::string_view reference) const {
    reference = text::trim(reference);
    if (const auto hash = reference.find('#'); hash != std::string_view::npos) {
        reference = reference.substr(0, hash);
    }
    if (reference.find("://") != std::string_view::npos) {
        return parse(reference);
    }
    const auto colon = reference.find(':');
    const auto slash = reference.find('/');
    if (colon != std::string_view::npos && (slash == std::string_view::npos || colon < slash)) {
        return std::nullopt;  // mailto:, javascript:, tel: ...
    }
    if (reference.starts_with("//")) {
        return parse(scheme + ":" + std::string(reference));
    }
    Url out = *this;
    if (reference.empty()) {
        return out;
    }
    std::string_view ref_path = reference;
    std::string ref_query;
    const auto q = reference.find('?');
    if (q != std::string_view::npos) {
        ref_path = reference.substr(0, q);
        ref_query = std::string(reference.substr(q + 1));
    }
    if (ref_path.empty()) {
        out.query = ref_query;
        return out;
    }
    if (ref_path.front() == '/') {
        out.path = remove_dot_segments(ref_path);
    } else {
        const auto base_dir = path.substr(0, path.rfind('/') + 1);
        out.path = remove_dot_segments(base_dir + std::string(ref_path));
    }
    out.query = ref_query;
    return out;
}

std::string Url::authority() const {
    return port == 0 ? host : host + ":" + std::to_string(port);
}

std::string Url::origin() const {
    return scheme + "://" + authority();
}

std::string Url::path_and_query() const {
    return query.empty() ? path : path + "?" + query;
}

std::string Url::str() const {
    return origin() + path_and_query();
}

}  // namespace itinera::ingest
