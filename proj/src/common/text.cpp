#include "itinera/common/text.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>

namespace itinera::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Returns the code point and advances `i`; invalid input yields U+FFFD and skips one byte.
char32_t next_code_point(std::string_view s, std::size_t& i, bool& ok) {
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char lead = byte(i);
    ok = true;
    if (lead < 0x80) {
        ++i;
        return lead;
    }
    int extra = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
        min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
        min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
        min = 0x10000;
    } else {
        ok = false;
        ++i;
        return kReplacement;
    }
    for (int k = 1; k <= extra; ++k) {
        if (i + k >= s.size() || (byte(i + k) & 0xC0) != 0x80) {
            ok = false;
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ok = false;
        ++i;
        return kReplacement;
    }
    i += extra + 1;
    return cp;
}

char32_t fold_code_point(char32_t cp) {
    if (cp < 0x80) {
        return static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    }
    switch (cp) {
        case U'à': case U'á': case U'â': case U'ã': case U'ä': case U'å':
        case U'À': case U'Á': case U'Â': case U'Ã': case U'Ä': case U'Å':
            return U'a';
        case U'è': case U'é': case U'ê': case U'ë':
        case U'È': case U'É': case U'Ê': case U'Ë':
            return U'e';
        case U'ì': case U'í': case U'î': case U'ï':
        case U'Ì': case U'Í': case U'Î': case U'Ï':
            return U'i';
        case U'ò': case U'ó': case U'ô': case U'õ': case U'ö':
        case U'Ò': case U'Ó': case U'Ô': case U'Õ': case U'Ö':
            return U'o';
        case U'ù': case U'ú': case U'û': case U'ü':
        case U'Ù': case U'Ú': case U'Û': case U'Ü':
            return U'u';
        case U'ç': case U'Ç':
            return U'c';
        case U'ñ': case U'Ñ':
            return U'n';
        case U'ý': case U'ÿ': case U'Ý':
            return U'y';
        case 0x2019: case 0x2018:  // typographic apostrophes
            return U'\'';
        default:
            return cp;
    }
}

}  // namespace

bool is_valid_utf8(std::string_view bytes) {
    std::size_t i = 0;
    bool ok = true;
    while (i < bytes.size()) {
        next_code_point(bytes, i, ok);
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::string sanitize_utf8(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    bool ok = true;
    while (i < bytes.size()) {
        const std::size_t start = i;
        const char32_t cp = next_code_point(bytes, i, ok);
        if (ok) {
            out.append(bytes.substr(start, i - start));
        } else {
            append_utf8(out, cp);
        }
    }
    return out;
}

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    bool ok = true;
    while (i < s.size()) {
        out.push_back(next_code_point(s, i, ok));
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : decode_utf8(s)) {
        append_utf8(out, fold_code_point(cp));
    }
    return out;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i > start) {
            out.emplace_back(s.substr(start, i - start));
        }
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.append(sep);
        }
        out.append(parts[i]);
    }
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    return join(split_whitespace(s), " ");
}

std::vector<std::string> words(std::string_view s) {
    const std::string folded = fold(s);
    std::vector<std::string> out;
    std::string current;
    for (char c : folded) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) || uc >= 0x80) {
            current.push_back(c);
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

bool starts_with_upper(std::string_view word) {
    if (word.empty()) {
        return false;
    }
    const auto cps = decode_utf8(word.substr(0, std::min<std::size_t>(4, word.size())));
    if (cps.empty()) {
        return false;
    }
    const char32_t first = cps.front();
    if (first < 0x80) {
        return std::isupper(static_cast<int>(first)) != 0;
    }
    // Latin-1 uppercase block and Latin Extended-A even code points.
    return (first >= 0xC0 && first <= 0xDE && first != 0xD7) ||
           (first >= 0x100 && first <= 0x17F && first % 2 == 0);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    const auto x = decode_utf8(a);
    const auto y = decode_utf8(b);
    std::vector<std::size_t> prev(y.size() + 1);
    std::vector<std::size_t> cur(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t hash = seed;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    return fmt::format("{:016x}", value);
}

std::string format_clock(int minutes) {
    return fmt::format("{:02d}:{:02d}", minutes / 60, minutes % 60);
}

}  // namespace itinera::text
