#include "itinera/ingest/html_text.hpp"

#include "itinera/common/text.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>

namespace itinera::ingest {

namespace {

const std::set<std::string>& skipped_elements() {
    static const std::set<std::string> tags{"script", "style",  "noscript", "template", "svg",    "nav",
                                            "header", "footer", "aside",    "form",     "iframe", "button",
                                            "select", "head"};
    return tags;
}

const std::set<std::string>& block_elements() {
    static const std::set<std::string> tags{
        "p",  "div", "br", "li", "ul", "ol", "tr", "table", "section", "article", "main", "h1", "h2", "h3",
        "h4", "h5",  "h6", "blockquote", "pre", "hr", "dd", "dt", "dl", "figure", "figcaption", "address", "body"};
    return tags;
}

const std::set<std::string>& void_elements() {
    static const std::set<std::string> tags{"br", "hr", "img", "input", "meta", "link", "area", "base", "col",
                                            "embed", "source", "track", "wbr", "param"};
    return tags;
}

// Class/id/role tokens that mark navigation or chrome rather than content.
bool is_boilerplate_marker(const std::string& value) {
    static const std::set<std::string> markers{"nav",     "navbar",  "menu",        "breadcrumb", "breadcrumbs",
                                               "cookie",  "cookies", "cookie-banner", "sidebar",  "navigation",
                                               "site-header", "site-footer", "skip-link"};
    for (const auto& token : text::split_whitespace(text::to_lower_ascii(value))) {
        if (markers.contains(token)) {
            return true;
        }
    }
    return false;
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    std::map<std::string, std::string> attributes;
};

// Parses a tag starting at s[pos] == '<'. On success sets `end` one past '>'.
std::optional<Tag> parse_tag(std::string_view s, std::size_t pos, std::size_t& end) {
    std::size_t i = pos + 1;
    Tag tag;
    if (i < s.size() && s[i] == '/') {
        tag.closing = true;
        ++i;
    }
    const std::size_t name_start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' || s[i] == ':')) {
        ++i;
    }
    if (i == name_start) {
        return std::nullopt;
    }
    tag.name = text::to_lower_ascii(s.substr(name_start, i - name_start));
    while (i < s.size() && s[i] != '>') {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        if (s[i] == '/') {
            tag.self_closing = true;
            ++i;
            continue;
        }
        const std::size_t an_start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '=' && s[i] != '>' &&
               s[i] != '/') {
            ++i;
        }
        std::string name = text::to_lower_ascii(s.substr(an_start, i - an_start));
        std::string value;
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i < s.size() && s[i] == '=') {
            ++i;
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
            }
            if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
                const char quote = s[i++];
                const std::size_t v_start = i;
                while (i < s.size() && s[i] != quote) {
                    ++i;
                }
                value = std::string(s.substr(v_start, i - v_start));
                if (i < s.size()) {
                    ++i;
                }
            } else {
                const std::size_t v_start = i;
                while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '>') {
                    ++i;
                }
                value = std::string(s.substr(v_start, i - v_start));
            }
        }
        if (!name.empty()) {
            tag.attributes.emplace(std::move(name), std::move(value));
        }
    }
    if (i >= s.size()) {
        return std::nullopt;
    }
    end = i + 1;
    return tag;
}

std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(haystack[i + k])) != needle[k]) {
                match = false;
                break;
            }
        }
        if (match) {
            return i;
        }
    }
    return std::string_view::npos;
}

std::string tidy_lines(std::string_view raw) {
    std::vector<std::string> lines;
    for (const auto& line : text::split(raw, '\n')) {
        auto normalized = text::normalize_whitespace(line);
        if (!normalized.empty()) {
            lines.push_back(std::move(normalized));
        }
    }
    return text::join(lines, "\n");
}

std::optional<ExtractedText> extract_html(std::string_view s, const std::string& uri) {
    std::string out;
    std::string title;
    std::string first_heading;
    std::string heading_buffer;
    int heading_depth = 0;

    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '<') {
            const auto next = s.find('<', i);
            const auto chunk = s.substr(i, next == std::string_view::npos ? std::string_view::npos : next - i);
            const auto decoded = decode_entities(chunk);
            out += decoded;
            if (heading_depth > 0) {
                heading_buffer += decoded;
            }
            i = next == std::string_view::npos ? s.size() : next;
            continue;
        }
        if (s.substr(i, 4) == "<!--") {
            const auto close = s.find("-->", i + 4);
            i = close == std::string_view::npos ? s.size() : close + 3;
            continue;
        }
        if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
            const auto close = s.find('>', i);
            i = close == std::string_view::npos ? s.size() : close + 1;
            continue;
        }
        std::size_t end = 0;
        auto tag = parse_tag(s, i, end);
        if (!tag) {
            out.push_back('<');
            ++i;
            continue;
        }
        i = end;
        const std::string& name = tag->name;

        if (name == "title" && !tag->closing) {
            // <title> lives inside <head>, which is otherwise skipped wholesale.
            const auto close = find_ci(s, "</title", i);
            title += decode_entities(s.substr(i, close == std::string_view::npos ? std::string_view::npos : close - i));
            i = close == std::string_view::npos ? s.size() : s.find('>', close) + 1;
            continue;
        }

        bool skip = !tag->closing && !tag->self_closing && skipped_elements().contains(name);
        if (!tag->closing && !tag->self_closing && !void_elements().contains(name)) {
            for (const char* attr : {"class", "id", "role"}) {
                const auto it = tag->attributes.find(attr);
                if (it != tag->attributes.end() && is_boilerplate_marker(it->second)) {
                    skip = true;
                }
            }
        }
        if (skip) {
            if (name == "head") {
                // Pull the title out before dropping the head.
                const auto close = find_ci(s, "</head", i);
                const auto head = s.substr(i, close == std::string_view::npos ? std::string_view::npos : close - i);
                const auto t = find_ci(head, "<title", 0);
                if (t != std::string_view::npos) {
                    const auto t_open_end = head.find('>', t);
                    const auto t_close = find_ci(head, "</title", t);
                    if (t_open_end != std::string_view::npos && t_close != std::string_view::npos && t_close > t_open_end) {
                        title += decode_entities(head.substr(t_open_end + 1, t_close - t_open_end - 1));
                    }
                }
                i = close == std::string_view::npos ? s.size() : s.find('>', close) + 1;
                continue;
            }
            // Skip the whole subtree, tracking nested elements of the same name.
            int depth = 1;
            std::size_t j = i;
            const bool raw_text = name == "script" || name == "style";
            while (depth > 0 && j < s.size()) {
                if (raw_text) {
                    const auto close = find_ci(s, "</" + name, j);
                    if (close == std::string_view::npos) {
                        j = s.size();
                        break;
                    }
                    const auto gt = s.find('>', close);
                    j = gt == std::string_view::npos ? s.size() : gt + 1;
                    depth = 0;
                    break;
                }
                const auto lt = s.find('<', j);
                if (lt == std::string_view::npos) {
                    j = s.size();
                    break;
                }
                std::size_t tag_end = 0;
                const auto inner = parse_tag(s, lt, tag_end);
                if (!inner) {
                    j = lt + 1;
                    continue;
                }
                j = tag_end;
                if (inner->name == name) {
                    if (inner->closing) {
                        --depth;
                    } else if (!inner->self_closing) {
                        ++depth;
                    }
                }
            }
            i = j;
            out.push_back('\n');
            continue;
        }

        const bool heading = name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
        if (heading) {
            if (tag->closing) {
                heading_depth = std::max(0, heading_depth - 1);
                if (heading_depth == 0 && first_heading.empty()) {
                    first_heading = text::normalize_whitespace(heading_buffer);
                }
                heading_buffer.clear();
            } else {
                ++heading_depth;
            }
        }
        if (block_elements().contains(name)) {
            out.push_back('\n');
        } else if (name == "td" || name == "th") {
            out.push_back(' ');
        }
    }

    ExtractedText result;
    result.body = tidy_lines(out);
    if (result.body.empty()) {
        return std::nullopt;
    }
    result.title = text::normalize_whitespace(title);
    if (result.title.empty()) {
        result.title = first_heading;
    }
    if (result.title.empty()) {
        result.title = uri;
    }
    return result;
}

std::optional<ExtractedText> extract_plain(std::string_view s, ContentKind kind, const std::string& uri) {
    ExtractedText result;
    std::string body;
    for (const auto& raw_line : text::split(s, '\n')) {
        std::string_view line = text::trim(raw_line);
        if (kind == ContentKind::markdown && !line.empty() && line.front() == '#') {
            while (!line.empty() && line.front() == '#') {
                line.remove_prefix(1);
            }
            line = text::trim(line);
            if (result.title.empty()) {
                result.title = std::string(line);
            }
        }
        body.append(line);
        body.push_back('\n');
    }
    result.body = tidy_lines(body);
    if (result.body.empty()) {
        return std::nullopt;
    }
    if (result.title.empty()) {
        result.title = uri;
    }
    return result;
}

}  // namespace

std::string decode_entities(std::string_view s) {
    static const std::map<std::string, std::string, std::less<>> named{
        {"amp", "&"},       {"lt", "<"},        {"gt", ">"},        {"quot", "\""},     {"apos", "'"},
        {"nbsp", " "},      {"agrave", "à"},    {"aacute", "á"},    {"egrave", "è"},    {"eacute", "é"},
        {"igrave", "ì"},    {"iacute", "í"},    {"ograve", "ò"},    {"oacute", "ó"},    {"ugrave", "ù"},
        {"uacute", "ú"},    {"Agrave", "À"},    {"Egrave", "È"},    {"Eacute", "É"},    {"Igrave", "Ì"},
        {"Ograve", "Ò"},    {"Ugrave", "Ù"},    {"ccedil", "ç"},    {"ntilde", "ñ"},    {"laquo", "«"},
        {"raquo", "»"},     {"rsquo", "’"},     {"lsquo", "‘"},     {"ldquo", "“"},     {"rdquo", "”"},
        {"ndash", "–"},     {"mdash", "—"},     {"hellip", "…"},    {"euro", "€"},      {"copy", "©"},
        {"deg", "°"},       {"middot", "·"},    {"bull", "•"}};
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        const auto ref = s.substr(i + 1, semi - i - 1);
        if (!ref.empty() && ref[0] == '#') {
            unsigned long cp = 0;
            const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
            const auto digits = ref.substr(hex ? 2 : 1);
            const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (res.ec == std::errc{} && res.ptr == digits.data() + digits.size() && cp > 0 && cp <= 0x10FFFF) {
                text::append_utf8(out, cp == 0xA0 ? U' ' : static_cast<char32_t>(cp));
                i = semi + 1;
                continue;
            }
        } else if (const auto it = named.find(ref); it != named.end()) {
            out += it->second;
            i = semi + 1;
            continue;
        }
        out.push_back(s[i++]);
    }
    return out;
}

std::vector<std::string> extract_links(std::string_view html) {
    std::vector<std::string> links;
    std::size_t i = 0;
    while ((i = html.find('<', i)) != std::string_view::npos) {
        if (html.substr(i, 4) == "<!--") {
            const auto close = html.find("-->", i + 4);
            i = close == std::string_view::npos ? html.size() : close + 3;
            continue;
        }
        std::size_t end = 0;
        const auto tag = parse_tag(html, i, end);
        if (!tag) {
            ++i;
            continue;
        }
        i = end;
        if (tag->name == "a" && !tag->closing) {
            const auto it = tag->attributes.find("href");
            if (it != tag->attributes.end() && !it->second.empty()) {
                links.push_back(decode_entities(it->second));
            }
        }
    }
    return links;
}

std::optional<ExtractedText> extract_text(std::string_view raw, ContentKind kind, const std::string& uri) {
    const std::string decoded = text::sanitize_utf8(raw);
    if (kind == ContentKind::html) {
        return extract_html(decoded, uri);
    }
    return extract_plain(decoded, kind, uri);
}

}  // namespace itinera::ingest
