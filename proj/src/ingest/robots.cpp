#include "itinera/ingest/robots.hpp"

#include "itinera/common/text.hpp"

#include <charconv>

namespace itinera::ingest {

namespace {

bool pattern_matches(std::string_view rule, std::string_view path) {
    // A rule is a prefix pattern unless it ends in '$'; either way reduce to a full-match glob.
    std::string pattern(rule);
    if (!pattern.empty() && pattern.back() == '$') {
        pattern.pop_back();
    } else {
        pattern.push_back('*');
    }
    std::size_t p = 0;
    std::size_t s = 0;
    std::size_t star = std::string::npos;
    std::size_t star_s = 0;
    while (s < path.size()) {
        if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_s = s;
        } else if (p < pattern.size() && pattern[p] == path[s]) {
            ++p;
            ++s;
        } else if (star != std::string::npos) {
            p = star + 1;
            s = ++star_s;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

}  // namespace

RobotsRules RobotsRules::parse(std::string_view content, std::string_view user_agent) {
    struct Group {
        std::vector<std::string> agents;
        RobotsRules rules;
    };
    std::vector<Group> groups;
    bool last_was_agent = false;
    for (const auto& raw : text::split(content, '\n')) {
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = text::trim(line);
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            continue;
        }
        const auto key = text::to_lower_ascii(text::trim(line.substr(0, colon)));
        const std::string value(text::trim(line.substr(colon + 1)));
        if (key == "user-agent") {
            if (!last_was_agent || groups.empty()) {
                groups.emplace_back();
            }
            groups.back().agents.push_back(text::to_lower_ascii(value));
            last_was_agent = true;
            continue;
        }
        last_was_agent = false;
        if (groups.empty()) {
            continue;
        }
        auto& rules = groups.back().rules;
        if (key == "disallow") {
            if (!value.empty()) {
                rules.rules_.push_back({value, false});
            }
        } else if (key == "allow") {
            rules.rules_.push_back({value, true});
        } else if (key == "crawl-delay") {
            double seconds = 0;
            const auto res = std::from_chars(value.data(), value.data() + value.size(), seconds);
            if (res.ec == std::errc{} && seconds >= 0) {
                rules.crawl_delay_ = seconds;
            }
        }
    }

    const auto ua = text::to_lower_ascii(user_agent);
    const std::string product = ua.substr(0, ua.find('/'));
    const Group* wildcard = nullptr;
    for (const auto& g : groups) {
        for (const auto& agent : g.agents) {
            if (agent == "*") {
                wildcard = wildcard ? wildcard : &g;
            } else if (!product.empty() && (product.find(agent) != std::string::npos || agent == product)) {
                return g.rules;
            }
        }
    }
    return wildcard ? wildcard->rules : RobotsRules{};
}

bool RobotsRules::allowed(std::string_view path_and_query) const {
    const Rule* best = nullptr;
    for (const auto& r : rules_) {
        if (!pattern_matches(r.pattern, path_and_query)) {
            continue;
        }
        if (!best || r.pattern.size() > best->pattern.size() ||
            (r.pattern.size() == best->pattern.size() && r.allow && !best->allow)) {
            best = &r;
        }
    }
    return best == nullptr || best->allow;
}

}  // namespace itinera::ingest
