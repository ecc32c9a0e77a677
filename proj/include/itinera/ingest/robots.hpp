#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itinera::ingest {

/// Robots exclusion rules for one user agent on one host.
class RobotsRules {
public:
    /// Picks the group naming `user_agent` (case-insensitive), else the `*` group.
    static RobotsRules parse(std::string_view content, std::string_view user_agent);
    static RobotsRules allow_all() { return {}; }

    /// Longest matching rule wins; on equal length Allow wins. `*` and a trailing `$` are honored.
    bool allowed(std::string_view path_and_query) const;
    std::optional<double> crawl_delay_seconds() const { return crawl_delay_; }

private:
    struct Rule {
        std::string pattern;
        bool allow = false;
    };
    std::vector<Rule> rules_;
    std::optional<double> crawl_delay_;
};

}  // namespace itinera::ingest
