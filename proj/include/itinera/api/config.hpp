#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace itinera::api {

/// Service configuration. Keys are listed in config_keys(); files are "key = value".
struct ApiConfig {
    // server
    std::string host = "127.0.0.1";
    int port = 8080;
    int threads = 8;  // worker pool size, the global cap on in-flight requests
    std::size_t max_body_bytes = 64 * 1024;
    bool trust_forwarded = false;
    std::string cors_origin;

    // paths
    std::filesystem::path data_dir = ITINERA_DATA_DIR;  // strings/, lexicon/, persona.json
    std::filesystem::path catalog_path;                 // default: <data_dir>/catalog/molise.jsonl
    std::filesystem::path index_path;                   // default: <state_dir>/index.bin
    std::filesystem::path state_dir = "var";            // sessions/, snapshots/
    std::size_t snapshot_every = 32;

    // chat provider
    std::string chat_provider = "mock";  // mock | openai
    std::string chat_base_url = "https://api.openai.com/v1";
    std::string chat_model = "gpt-4o";
    std::string chat_api_key_env = "OPENAI_API_KEY";
    int chat_timeout_ms = 30'000;
    int chat_max_attempts = 3;
    int chat_max_concurrency = 4;
    bool extraction_fallback = true;

    // embeddings
    std::string embed_provider = "mock";  // mock | cohere | openai
    std::string embed_base_url = "https://api.cohere.com";
    std::string embed_model = "embed-multilingual-v3.0";
    std::string embed_api_key_env = "COHERE_API_KEY";
    std::size_t embed_dim = 1024;

    // planner
    int day_start = 540;
    int day_end = 1140;
    int iteration_cap = 1000;
    int perturbation_rounds = 12;
    std::string travel_mode = "walk";
    std::size_t max_candidates = 60;
    double similar_bonus = 0.2;

    // retrieval
    std::size_t retrieval_k = 6;
    std::size_t retrieval_budget_tokens = 1200;

    // crawler politeness
    std::int64_t crawl_delay_ms = 1000;
    std::string crawl_user_agent = "itinera-crawler/1.0";
    std::size_t crawl_max_pages = 50;
    std::size_t crawl_max_depth = 3;
    bool crawl_respect_robots = true;

    std::filesystem::path resolved_catalog() const;
    std::filesystem::path resolved_index() const;
};

struct ConfigKey {
    std::string name;
    std::string help;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Environment variable for a key: "planner.day_start" -> "ITINERA_PLANNER_DAY_START".
std::string env_name(const std::string& key);

/// Sets one key. Throws ValidationError for an unknown key or a bad value.
void set_value(ApiConfig& config, const std::string& key, const std::string& value);

/// Current values as strings, keyed like the file.
std::map<std::string, std::string> to_map(const ApiConfig& config);

/// Defaults, then the file (if any), then ITINERA_* variables from `env`. Relative paths in the
/// file resolve against the file's directory.
ApiConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& env);

/// The process environment restricted to ITINERA_* names.
std::map<std::string, std::string> process_env();

/// Checks referenced paths: data and catalog must exist; state and index directories are created.
void prepare(const ApiConfig& config);

}  // namespace itinera::api
