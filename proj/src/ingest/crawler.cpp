#include "itinera/ingest/crawler.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"
#include "itinera/ingest/html_text.hpp"
#include "itinera/ingest/robots.hpp"

#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <set>
#include <spdlog/spdlog.h>

namespace itinera::ingest {

namespace {

struct FrontierItem {
    Url url;
    std::size_t depth = 0;
};

struct Outcome {
    FrontierItem item;
    std::optional<FetchResponse> response;
    std::string error;
};

// Serializes requests per host and enforces the minimum spacing between them.
class PolitenessGate {
public:
    PolitenessGate(Clock& clock, std::int64_t default_delay_ms) : clock_(clock), default_delay_(default_delay_ms) {}

    void set_delay(const std::string& host, std::int64_t delay_ms) {
        std::lock_guard lock(mutex_);
        hosts_.try_emplace(host, default_delay_).first->second.delay = delay_ms;
    }

    template <typename Fn>
    auto run(const std::string& host, std::vector<RequestLogEntry>& log, std::mutex& log_mutex, const std::string& url,
             Fn&& fn) {
        HostState* state = nullptr;
        {
            std::lock_guard lock(mutex_);
            state = &hosts_.try_emplace(host, default_delay_).first->second;
        }
        std::lock_guard host_lock(state->mutex);
        if (state->last_ms) {
            const auto wait = *state->last_ms + state->delay - clock_.now_ms();
            if (wait > 0) {
                clock_.sleep_ms(wait);
            }
        }
        const auto at = clock_.now_ms();
        state->last_ms = at;
        int status = 0;
        try {
            auto result = fn();
            status = result.status;
            std::lock_guard lock(log_mutex);
            log.push_back({url, host, at, status});
            return result;
        } catch (...) {
            std::lock_guard lock(log_mutex);
            log.push_back({url, host, at, status});
            throw;
        }
    }

private:
    struct HostState {
        std::int64_t delay = 0;
        std::optional<std::int64_t> last_ms;
        std::mutex mutex;

        explicit HostState(std::int64_t d) : delay(d) {}
        HostState(HostState&& other) noexcept : delay(other.delay), last_ms(other.last_ms) {}
    };

    Clock& clock_;
    std::int64_t default_delay_;
    std::mutex mutex_;
    std::map<std::string, HostState> hosts_;
};

std::optional<ContentKind> kind_from_content_type(const std::string& content_type) {
    const auto ct = text::to_lower_ascii(content_type);
    if (ct.find("html") != std::string::npos) {
        return ContentKind::html;
    }
    if (ct.find("text/markdown") != std::string::npos) {
        return ContentKind::markdown;
    }
    if (ct.find("text/plain") != std::string::npos || ct.empty()) {
        return ContentKind::plain_text;
    }
    return std::nullopt;
}

}  // namespace

CrawlResult crawl(const std::vector<std::string>& seed_urls, const CrawlOptions& options, Fetcher& fetcher,
                  Clock& clock) {
    CrawlResult result;
    std::mutex log_mutex;
    PolitenessGate gate(clock, options.delay_ms);

    std::set<std::string> scope;
    std::set<std::string> seen;
    std::deque<FrontierItem> frontier;
    for (const auto& s : seed_urls) {
        auto url = Url::parse(s);
        if (!url) {
            result.skipped.push_back({s, "invalid seed url"});
            continue;
        }
        scope.insert(url->authority());
        if (seen.insert(url->str()).second) {
            frontier.push_back({*url, 0});
        }
    }

    std::map<std::string, RobotsRules> robots;
    auto rules_for = [&](const Url& url) -> const RobotsRules& {
        const auto host = url.authority();
        if (auto it = robots.find(host); it != robots.end()) {
            return it->second;
        }
        RobotsRules rules = RobotsRules::allow_all();
        if (options.respect_robots) {
            auto robots_url = *Url::parse(url.origin() + "/robots.txt");
            try {
                const auto resp = gate.run(host, result.requests, log_mutex, robots_url.str(),
                                           [&] { return fetcher.fetch(robots_url); });
                if (resp.status >= 200 && resp.status < 300) {
                    rules = RobotsRules::parse(resp.body, options.user_agent);
                    if (const auto d = rules.crawl_delay_seconds()) {
                        const auto ms = static_cast<std::int64_t>(*d * 1000.0);
                        if (ms > options.delay_ms) {
                            gate.set_delay(host, ms);
                        }
                    }
                } else if (resp.status >= 500) {
                    rules = RobotsRules::parse("User-agent: *\nDisallow: /\n", options.user_agent);
                }
            } catch (const ProviderError& e) {
                spdlog::warn("crawl: robots.txt for {} unavailable: {}", host, e.what());
                rules = RobotsRules::parse("User-agent: *\nDisallow: /\n", options.user_agent);
            }
        }
        return robots.emplace(host, std::move(rules)).first->second;
    };

    std::size_t pages = 0;
    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    while (!frontier.empty() && pages < options.max_pages) {
        // Next batch: frontier order, one URL per host, bounded by workers and remaining budget.
        std::vector<FrontierItem> batch;
        std::set<std::string> batch_hosts;
        for (auto it = frontier.begin(); it != frontier.end() && batch.size() < std::min(workers, options.max_pages - pages);) {
            const auto host = it->url.authority();
            if (batch_hosts.contains(host)) {
                ++it;
                continue;
            }
            if (!rules_for(it->url).allowed(it->url.path_and_query())) {
                result.skipped.push_back({it->url.str(), "disallowed by robots.txt"});
                it = frontier.erase(it);
                continue;
            }
            batch_hosts.insert(host);
            batch.push_back(*it);
            it = frontier.erase(it);
        }
        if (batch.empty()) {
            break;
        }

        auto fetch_one = [&](const FrontierItem& item) {
            Outcome out{item, std::nullopt, {}};
            try {
                out.response = gate.run(item.url.authority(), result.requests, log_mutex, item.url.str(),
                                        [&] { return fetcher.fetch(item.url); });
            } catch (const std::exception& e) {
                out.error = e.what();
            }
            return out;
        };
        std::vector<Outcome> outcomes;
        if (batch.size() == 1) {
            outcomes.push_back(fetch_one(batch.front()));
        } else {
            std::vector<std::future<Outcome>> futures;
            for (const auto& item : batch) {
                futures.push_back(std::async(std::launch::async, fetch_one, item));
            }
            for (auto& f : futures) {
                outcomes.push_back(f.get());
            }
        }

        for (auto& out : outcomes) {
            const auto url = out.item.url.str();
            if (!out.response) {
                result.skipped.push_back({url, "fetch failed: " + out.error, 0});
                continue;
            }
            const auto& resp = *out.response;
            if (resp.status >= 300 && resp.status < 400 && !resp.location.empty()) {
                result.skipped.push_back({url, "redirect", resp.status});
                if (auto target = out.item.url.resolve(resp.location);
                    target && scope.contains(target->authority()) && seen.insert(target->str()).second) {
                    frontier.push_back({*target, out.item.depth});
                }
                continue;
            }
            if (resp.status < 200 || resp.status >= 300) {
                result.skipped.push_back({url, "http error", resp.status});
                continue;
            }
            ++pages;
            const auto kind = kind_from_content_type(resp.content_type);
            if (!kind) {
                result.skipped.push_back({url, "unsupported content type", resp.status});
                continue;
            }
            if (*kind == ContentKind::html && out.item.depth < options.max_depth) {
                for (const auto& href : extract_links(resp.body)) {
                    auto target = out.item.url.resolve(href);
                    if (!target || !scope.contains(target->authority())) {
                        continue;
                    }
                    if (seen.insert(target->str()).second) {
                        frontier.push_back({*target, out.item.depth + 1});
                    }
                }
            }
            const auto extracted = extract_text(resp.body, *kind, url);
            if (!extracted) {
                result.skipped.push_back({url, "empty", resp.status});
                continue;
            }
            KnowledgeDocument doc;
            doc.source = Source::crawl;
            doc.uri = url;
            doc.doc_id = make_doc_id(doc.source, url);
            doc.title = extracted->title;
            doc.body = extracted->body;
            doc.language = detect_language(doc.body);
            doc.fetched_at = resp.last_modified.value_or(clock.now_ms());
            result.documents.push_back(std::move(doc));
        }
    }
    return result;
}

void to_json(nlohmann::json& j, const RequestLogEntry& e) {
    j = nlohmann::json{{"url", e.url}, {"host", e.host}, {"at_ms", e.at_ms}, {"status", e.status}};
}

}  // namespace itinera::ingest
