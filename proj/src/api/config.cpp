#include "itinera/api/config.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"
#include "itinera/dialogue/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fmt/format.h>
#include <functional>

extern char** environ;

namespace itinera::api {

namespace fs = std::filesystem;

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError(key, "not a number: '" + value + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw ValidationError(key, "not a number: '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto v = text::to_lower_ascii(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ValidationError(key, "not a boolean: '" + value + "'");
}

struct Entry {
    ConfigKey key;
    std::function<void(ApiConfig&, const std::string&)> set;
    std::function<std::string(const ApiConfig&)> get;
};

template <typename T>
Entry number(std::string name, std::string help, T ApiConfig::*field, T min) {
    return {{name, std::move(help)},
            [=](ApiConfig& c, const std::string& v) {
                const T n = parse_number<T>(name, v);
                if (n < min) {
                    throw ValidationError(name, fmt::format("must be at least {}", min));
                }
                c.*field = n;
            },
            [=](const ApiConfig& c) { return std::to_string(c.*field); }};
}

Entry string(std::string name, std::string help, std::string ApiConfig::*field) {
    return {{name, std::move(help)},
            [=](ApiConfig& c, const std::string& v) { c.*field = v; },
            [=](const ApiConfig& c) { return c.*field; }};
}

Entry flag(std::string name, std::string help, bool ApiConfig::*field) {
    return {{name, std::move(help)},
            [=](ApiConfig& c, const std::string& v) { c.*field = parse_bool(name, v); },
            [=](const ApiConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

Entry path(std::string name, std::string help, fs::path ApiConfig::*field) {
    return {{name, std::move(help)},
            [=](ApiConfig& c, const std::string& v) { c.*field = v; },
            [=](const ApiConfig& c) { return (c.*field).string(); }};
}

Entry choice(std::string name, std::string help, std::string ApiConfig::*field,
             std::initializer_list<const char*> choices) {
    std::vector<std::string> allowed(choices.begin(), choices.end());
    return {{name, std::move(help)},
            [=](ApiConfig& c, const std::string& v) {
                if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
                    throw ValidationError(name, "unsupported value '" + v + "'");
                }
                c.*field = v;
            },
            [=](const ApiConfig& c) { return c.*field; }};
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        t.push_back(string("server.host", "listen address; keep it private behind the proxy", &ApiConfig::host));
        t.push_back(number("server.port", "listen port", &ApiConfig::port, 0));
        t.push_back(number("server.threads", "worker threads (global cap on concurrent requests)",
                           &ApiConfig::threads, 1));
        t.push_back(number("server.max_body_bytes", "largest accepted request body", &ApiConfig::max_body_bytes,
                           std::size_t{1}));
        t.push_back(flag("server.trust_forwarded", "log X-Forwarded-For as the client address",
                         &ApiConfig::trust_forwarded));
        t.push_back(string("server.cors_origin", "Access-Control-Allow-Origin value; empty disables CORS",
                           &ApiConfig::cors_origin));
        t.push_back(path("paths.data", "strings/, lexicon/ and persona.json", &ApiConfig::data_dir));
        t.push_back(path("paths.catalog", "POI catalog (JSON lines)", &ApiConfig::catalog_path));
        t.push_back(path("paths.index", "vector index snapshot; optional", &ApiConfig::index_path));
        t.push_back(path("paths.state", "session logs and snapshots", &ApiConfig::state_dir));
        t.push_back(number("store.snapshot_every", "events between session snapshots", &ApiConfig::snapshot_every,
                           std::size_t{1}));
        t.push_back(choice("chat.provider", "mock | openai", &ApiConfig::chat_provider, {"mock", "openai"}));
        t.push_back(string("chat.base_url", "OpenAI-compatible endpoint", &ApiConfig::chat_base_url));
        t.push_back(string("chat.model", "model name", &ApiConfig::chat_model));
        t.push_back(string("chat.api_key_env", "environment variable holding the API key",
                           &ApiConfig::chat_api_key_env));
        t.push_back(number("chat.timeout_ms", "per-call timeout", &ApiConfig::chat_timeout_ms, 1));
        t.push_back(number("chat.max_attempts", "attempts per call", &ApiConfig::chat_max_attempts, 1));
        t.push_back(number("chat.max_concurrency", "simultaneous model calls", &ApiConfig::chat_max_concurrency, 1));
        t.push_back(flag("chat.extraction_fallback", "ask the model when slot rules find nothing",
                         &ApiConfig::extraction_fallback));
        t.push_back(choice("embed.provider", "mock | cohere | openai", &ApiConfig::embed_provider,
                           {"mock", "cohere", "openai"}));
        t.push_back(string("embed.base_url", "embedding endpoint", &ApiConfig::embed_base_url));
        t.push_back(string("embed.model", "embedding model", &ApiConfig::embed_model));
        t.push_back(string("embed.api_key_env", "environment variable holding the API key",
                           &ApiConfig::embed_api_key_env));
        t.push_back(number("embed.dim", "embedding dimension of the HTTP provider", &ApiConfig::embed_dim,
                           std::size_t{1}));
        t.push_back(number("planner.day_start", "earliest visit start, minutes from midnight", &ApiConfig::day_start,
                           0));
        t.push_back(number("planner.day_end", "latest visit end, minutes from midnight", &ApiConfig::day_end, 0));
        t.push_back(number("planner.iteration_cap", "local search iterations", &ApiConfig::iteration_cap, 1));
        t.push_back(number("planner.perturbation_rounds", "perturbation rounds", &ApiConfig::perturbation_rounds, 0));
        t.push_back(choice("planner.travel_mode", "walk | drive", &ApiConfig::travel_mode, {"walk", "drive"}));
        t.push_back(number("planner.max_candidates", "POIs handed to the planner", &ApiConfig::max_candidates,
                           std::size_t{1}));
        t.push_back({{"planner.similar_bonus", "weight boost for tags liked by similar travelers"},
                     [](ApiConfig& c, const std::string& v) {
                         const double d = parse_double("planner.similar_bonus", v);
                         if (d < 0.0) {
                             throw ValidationError("planner.similar_bonus", "must not be negative");
                         }
                         c.similar_bonus = d;
                     },
                     [](const ApiConfig& c) { return fmt::format("{}", c.similar_bonus); }});
        t.push_back(number("retrieval.k", "chunks retrieved per question", &ApiConfig::retrieval_k, std::size_t{1}));
        t.push_back(number("retrieval.budget_tokens", "prompt token budget for context",
                           &ApiConfig::retrieval_budget_tokens, std::size_t{1}));
        t.push_back(number("crawl.delay_ms", "minimum spacing between requests to one host",
                           &ApiConfig::crawl_delay_ms, std::int64_t{0}));
        t.push_back(string("crawl.user_agent", "User-Agent sent by the crawler", &ApiConfig::crawl_user_agent));
        t.push_back(number("crawl.max_pages", "pages per crawl", &ApiConfig::crawl_max_pages, std::size_t{1}));
        t.push_back(number("crawl.max_depth", "link depth from the seeds", &ApiConfig::crawl_max_depth,
                           std::size_t{0}));
        t.push_back(flag("crawl.respect_robots", "honour robots.txt", &ApiConfig::crawl_respect_robots));
        return t;
    }();
    return table;
}

const Entry* find_entry(const std::string& key) {
    for (const auto& e : entries()) {
        if (e.key.name == key) {
            return &e;
        }
    }
    return nullptr;
}

bool is_path_key(const std::string& key) {
    return key.starts_with("paths.");
}

}  // namespace

fs::path ApiConfig::resolved_catalog() const {
    return catalog_path.empty() ? data_dir / "catalog" / "molise.jsonl" : catalog_path;
}

fs::path ApiConfig::resolved_index() const {
    return index_path.empty() ? state_dir / "index.bin" : index_path;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& e : entries()) {
            out.push_back(e.key);
        }
        return out;
    }();
    return keys;
}

std::string env_name(const std::string& key) {
    std::string out = "ITINERA_";
    for (char c : key) {
        out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

void set_value(ApiConfig& config, const std::string& key, const std::string& value) {
    const auto* e = find_entry(key);
    if (e == nullptr) {
        throw ValidationError(key, "unknown configuration key");
    }
    e->set(config, value);
}

std::map<std::string, std::string> to_map(const ApiConfig& config) {
    std::map<std::string, std::string> out;
    for (const auto& e : entries()) {
        out[e.key.name] = e.get(config);
    }
    return out;
}

ApiConfig load_config(const std::optional<fs::path>& file, const std::map<std::string, std::string>& env) {
    ApiConfig config;
    if (file) {
        const auto base = fs::absolute(*file).parent_path();
        for (const auto& [key, value] : dialogue::load_key_values(*file)) {
            if (is_path_key(key) && !value.empty() && fs::path(value).is_relative()) {
                set_value(config, key, (base / value).lexically_normal().string());
            } else {
                set_value(config, key, value);
            }
        }
    }
    for (const auto& e : entries()) {
        const auto it = env.find(env_name(e.key.name));
        if (it != env.end()) {
            e.set(config, it->second);
        }
    }
    if (config.day_end <= config.day_start) {
        throw ValidationError("planner.day_end", "must be after planner.day_start");
    }
    return config;
}

std::map<std::string, std::string> process_env() {
    std::map<std::string, std::string> out;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        const std::string_view entry(*e);
        const auto eq = entry.find('=');
        if (eq != std::string_view::npos && entry.starts_with("ITINERA_")) {
            out.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
        }
    }
    return out;
}

void prepare(const ApiConfig& config) {
    if (!fs::is_directory(config.data_dir)) {
        throw ValidationError("paths.data", "not a directory: " + config.data_dir.string());
    }
    if (!fs::is_regular_file(config.resolved_catalog())) {
        throw ValidationError("paths.catalog", "missing file: " + config.resolved_catalog().string());
    }
    fs::create_directories(config.state_dir);
    const auto index_dir = config.resolved_index().parent_path();
    if (!index_dir.empty()) {
        fs::create_directories(index_dir);
    }
}

}  // namespace itinera::api
