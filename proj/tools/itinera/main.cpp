// itinera: service entrypoint and offline tooling.

#include "itinera/api/config.hpp"
#include "itinera/api/server.hpp"
#include "itinera/api/service.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/ingest/crawler.hpp"
#include "itinera/ingest/manifest.hpp"
#include "itinera/ingest/sources.hpp"
#include "itinera/planner/instances.hpp"
#include "itinera/planner/planner.hpp"
#include "itinera/retrieval/vector_index.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <csignal>
#include <iostream>
#include <random>
#include <thread>

using namespace itinera;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config_file;
    std::string log_level = "info";
};

api::ApiConfig config_from(const Globals& g) {
    return api::load_config(g.config_file.empty() ? std::nullopt : std::optional<fs::path>(g.config_file),
                            api::process_env());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int serve(const Globals& g, bool print_config) {
    const auto config = config_from(g);
    if (print_config) {
        const auto values = api::to_map(config);
        for (const auto& key : api::config_keys()) {
            fmt::print("# {} (env {})\n{} = {}\n", key.help, api::env_name(key.name), key.name, values.at(key.name));
        }
        return 0;
    }
    // SIGINT/SIGTERM are taken synchronously by a watcher thread, which stops the server.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    api::Service service(config);
    api::ApiServer server(service);
    std::thread watcher([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        spdlog::info("signal {}, shutting down", sig);
        server.stop();
    });
    const bool ok = server.listen(config.host, config.port);
    if (!ok) {
        spdlog::error("cannot listen on {}:{}", config.host, config.port);
        pthread_kill(watcher.native_handle(), SIGTERM);
    }
    watcher.join();
    return ok ? 0 : 1;
}

void write_result(const ingest::IngestResult& result, const std::string& out, bool merge,
                  const ingest::ChunkingOptions& chunking) {
    auto manifest = ingest::build_manifest(result.documents, result.skipped, chunking);
    if (merge && fs::exists(out)) {
        manifest = ingest::merge_manifests(ingest::read_manifest(out), manifest, chunking);
    }
    ingest::write_manifest(out, manifest);
    fmt::print("{} documents, {} chunks, {} skipped -> {}\n", manifest.documents.size(), manifest.chunks.size(),
               manifest.skipped.size(), out);
    for (const auto& s : result.skipped) {
        spdlog::info("skipped {}: {}", s.uri, s.reason);
    }
}

int crawl_command(const Globals& g, const std::vector<std::string>& seeds, const std::string& site_root,
                  const std::string& request_log, const std::string& out, bool merge,
                  const ingest::ChunkingOptions& chunking) {
    const auto config = config_from(g);
    ingest::CrawlOptions options;
    options.delay_ms = config.crawl_delay_ms;
    options.user_agent = config.crawl_user_agent;
    options.max_pages = config.crawl_max_pages;
    options.max_depth = config.crawl_max_depth;
    options.respect_robots = config.crawl_respect_robots;
    SystemClock clock;
    std::unique_ptr<ingest::Fetcher> fetcher;
    if (site_root.empty()) {
        fetcher = std::make_unique<ingest::HttpFetcher>(options.user_agent, 15'000);
    } else {
        fetcher = std::make_unique<ingest::FixtureSiteFetcher>(site_root);
    }
    const auto result = ingest::crawl(seeds, options, *fetcher, clock);
    if (!request_log.empty()) {
        files::write_atomic(request_log, nlohmann::json(result.requests).dump(2) + "\n");
    }
    write_result({result.documents, result.skipped}, out, merge, chunking);
    return 0;
}

int index_build(const Globals& g, const std::string& manifest_path, std::string out) {
    auto config = config_from(g);
    if (out.empty()) {
        out = config.resolved_index().string();
    }
    const auto embedder = api::make_embedder(config);
    const auto manifest = ingest::read_manifest(manifest_path);
    retrieval::VectorIndex index(embedder->dim());
    const auto added = retrieval::index_chunks(index, *embedder, manifest.chunks);
    if (!fs::path(out).parent_path().empty()) {
        fs::create_directories(fs::path(out).parent_path());
    }
    // write-new-then-rename so a running service never reads a half-written file
    const auto tmp = out + ".tmp";
    index.save(tmp);
    fs::rename(tmp, out);
    fmt::print("{} chunks indexed (dim {}) -> {}\n", added, embedder->dim(), out);
    return 0;
}

int plan_command(const std::string& path, bool brute) {
    const auto instance = planner::load_instance(path);
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = planner::plan(instance.request, instance.pois, instance.matrix);
    const double elapsed = seconds_since(t0);
    const auto violations = planner::validate(result.itinerary, instance.request, instance.pois, instance.matrix);
    nlohmann::json out{{"itinerary", result.itinerary},
                       {"diagnostics", result.diagnostics},
                       {"violations", violations},
                       {"seconds", elapsed}};
    if (brute) {
        if (instance.pois.size() > planner::kBruteForceLimit) {
            throw ValidationError("pois", fmt::format("brute force needs at most {} POIs", planner::kBruteForceLimit));
        }
        out["brute_force_score"] =
            planner::brute_force_plan(instance.request, instance.pois, instance.matrix).totals.score;
    }
    std::cout << out.dump(2) << "\n";
    return violations.empty() ? 0 : 2;
}

int eval_planner(std::size_t count, std::size_t oracle_count, std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    std::size_t infeasible = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto inst = planner::random_instance(seed + i);
        const auto r = planner::plan(inst.request, inst.pois, inst.matrix);
        if (!planner::validate(r.itinerary, inst.request, inst.pois, inst.matrix).empty()) {
            ++infeasible;
        }
    }
    const double feasibility_s = seconds_since(t0);

    planner::InstanceShape small{2, 6, 1, 2};
    double worst = 1.0;
    double gap_sum = 0.0;
    for (std::size_t i = 0; i < oracle_count; ++i) {
        const auto inst = planner::random_instance(seed + 1'000'000 + i, small);
        const double got = planner::plan(inst.request, inst.pois, inst.matrix).itinerary.totals.score;
        const double best = planner::brute_force_plan(inst.request, inst.pois, inst.matrix).totals.score;
        const double ratio = best <= 0.0 ? 1.0 : got / best;
        worst = std::min(worst, ratio);
        gap_sum += 1.0 - ratio;
    }
    fmt::print("feasibility: {}/{} feasible in {:.2f} s\n", count - infeasible, count, feasibility_s);
    fmt::print("oracle: {} instances, worst ratio {:.4f}, mean gap {:.4f}\n", oracle_count, worst,
               oracle_count == 0 ? 0.0 : gap_sum / static_cast<double>(oracle_count));
    return infeasible == 0 && worst >= 0.9 ? 0 : 2;
}

int eval_retrieval(std::size_t chunks, std::size_t queries, const std::vector<std::size_t>& ks, std::uint64_t seed) {
    constexpr std::size_t dim = 64;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto random_vector = [&] {
        retrieval::EmbeddingVector v;
        for (std::size_t i = 0; i < dim; ++i) {
            v.values.push_back(normal(rng));
        }
        return v;
    };
    std::vector<retrieval::IndexEntry> entries;
    for (std::size_t i = 0; i < chunks; ++i) {
        // every tenth chunk repeats an earlier vector so ties occur
        auto v = i % 10 == 9 ? entries[i / 2].vector : random_vector();
        entries.push_back({fmt::format("c{:06}", (i * 7919) % 1'000'003), std::move(v), {}, ""});
    }
    retrieval::VectorIndex index(dim);
    index.add(entries);
    std::size_t mismatches = 0;
    for (std::size_t q = 0; q < queries; ++q) {
        const auto query = q % 5 == 0 ? entries[q % entries.size()].vector : random_vector();
        std::vector<std::pair<double, std::string>> all;
        for (const auto& e : entries) {
            all.emplace_back(retrieval::cosine(query, e.vector), e.chunk_id);
        }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (const auto k : ks) {
            const auto hits = index.query_vector(query, k);
            for (std::size_t i = 0; i < hits.size(); ++i) {
                if (hits[i].chunk_id != all[i].second) {
                    ++mismatches;
                    break;
                }
            }
        }
    }
    fmt::print("retrieval: {} chunks, {} queries, k in {{{}}}: {} mismatching result lists\n", chunks, queries,
               fmt::join(ks, ","), mismatches);
    return mismatches == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"itinera: conversational trip planner"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("-c,--config", g.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error");

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API");
    bool print_config = false;
    serve_cmd->add_flag("--print-config", print_config, "print the effective configuration and exit");

    ingest::ChunkingOptions chunking;
    std::string out = "manifest.json";
    bool merge = false;
    auto* ingest_cmd = app.add_subcommand("ingest", "build a knowledge manifest");
    ingest_cmd->require_subcommand(1);
    ingest_cmd->add_option("--out", out, "manifest file");
    ingest_cmd->add_flag("--merge", merge, "merge into an existing manifest");
    ingest_cmd->add_option("--max-tokens", chunking.max_tokens, "chunk size in tokens");
    ingest_cmd->add_option("--overlap", chunking.overlap, "chunk overlap in tokens");
    std::string dir;
    auto* ingest_dir = ingest_cmd->add_subcommand("dir", "ingest a directory of html, md and txt files");
    ingest_dir->add_option("path", dir)->required()->check(CLI::ExistingDirectory);
    std::vector<std::string> seeds;
    std::string site_root;
    std::string request_log;
    auto* ingest_crawl = ingest_cmd->add_subcommand("crawl", "crawl sites from seed URLs");
    ingest_crawl->add_option("seeds", seeds)->required();
    ingest_crawl->add_option("--site-root", site_root, "serve from an offline site snapshot instead of the network")
        ->check(CLI::ExistingDirectory);
    ingest_crawl->add_option("--request-log", request_log, "write the request log as JSON");
    std::string dump;
    auto* ingest_export = ingest_cmd->add_subcommand("export", "ingest a WordPress-style site export");
    ingest_export->add_option("dump", dump)->required()->check(CLI::ExistingFile);

    auto* index_cmd = app.add_subcommand("index", "vector index tools");
    index_cmd->require_subcommand(1);
    std::string manifest_path;
    std::string index_out;
    auto* index_build_cmd = index_cmd->add_subcommand("build", "embed a manifest's chunks");
    index_build_cmd->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
    index_build_cmd->add_option("--out", index_out, "index file (default: paths.index)");

    std::string instance_path;
    bool brute = false;
    auto* plan_cmd = app.add_subcommand("plan", "plan one instance file and print the itinerary");
    plan_cmd->add_option("instance", instance_path)->required()->check(CLI::ExistingFile);
    plan_cmd->add_flag("--brute-force", brute, "also report the exhaustive optimum");

    std::uint64_t instance_seed = 1;
    planner::InstanceShape shape;
    auto* instance_cmd = app.add_subcommand("instance", "print a random planning instance");
    instance_cmd->add_option("--seed", instance_seed);
    instance_cmd->add_option("--min-pois", shape.min_pois);
    instance_cmd->add_option("--max-pois", shape.max_pois);
    instance_cmd->add_option("--min-days", shape.min_days);
    instance_cmd->add_option("--max-days", shape.max_days);

    auto* eval_cmd = app.add_subcommand("eval", "offline evaluations");
    eval_cmd->require_subcommand(1);
    std::uint64_t seed = 1;
    eval_cmd->add_option("--seed", seed);
    std::size_t instances = 1000;
    std::size_t oracle = 100;
    auto* eval_planner_cmd = eval_cmd->add_subcommand("planner", "feasibility and optimality gap");
    eval_planner_cmd->add_option("--instances", instances);
    eval_planner_cmd->add_option("--oracle", oracle, "small instances compared with brute force");
    std::size_t chunks = 1000;
    std::size_t queries = 50;
    std::vector<std::size_t> ks{1, 5, 20};
    auto* eval_retrieval_cmd = eval_cmd->add_subcommand("retrieval", "index results against brute-force cosine");
    eval_retrieval_cmd->add_option("--chunks", chunks);
    eval_retrieval_cmd->add_option("--queries", queries);
    eval_retrieval_cmd->add_option("--k", ks)->delimiter(',');

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    try {
        if (serve_cmd->parsed()) {
            return serve(g, print_config);
        }
        if (ingest_dir->parsed()) {
            write_result(ingest::ingest_directory(dir), out, merge, chunking);
            return 0;
        }
        if (ingest_crawl->parsed()) {
            return crawl_command(g, seeds, site_root, request_log, out, merge, chunking);
        }
        if (ingest_export->parsed()) {
            write_result(ingest::ingest_site_export(dump), out, merge, chunking);
            return 0;
        }
        if (index_build_cmd->parsed()) {
            return index_build(g, manifest_path, index_out);
        }
        if (plan_cmd->parsed()) {
            return plan_command(instance_path, brute);
        }
        if (instance_cmd->parsed()) {
            std::cout << planner::instance_to_json(planner::random_instance(instance_seed, shape)).dump(2) << "\n";
            return 0;
        }
        if (eval_planner_cmd->parsed()) {
            return eval_planner(instances, oracle, seed);
        }
        if (eval_retrieval_cmd->parsed()) {
            return eval_retrieval(chunks, queries, ks, seed);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
