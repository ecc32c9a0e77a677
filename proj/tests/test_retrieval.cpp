#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/retrieval/embedding.hpp"
#include "itinera/retrieval/prompt.hpp"
#include "itinera/retrieval/vector_index.hpp"
#include "local_server.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <doctest.h>
#include <fmt/format.h>
#include <random>

using namespace itinera;
using namespace itinera::retrieval;

namespace {

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    EmbeddingVector v;
    for (std::size_t i = 0; i < dim; ++i) {
        v.values.push_back(n(rng));
    }
    return v;
}

// Independent reference: score every entry, full sort, take the first k.
std::vector<std::string> brute_force(const std::vector<IndexEntry>& entries, const EmbeddingVector& q, std::size_t k) {
    std::vector<std::pair<double, std::string>> all;
    for (const auto& e : entries) {
        double qq = 0;
        double ee = 0;
        for (std::size_t i = 0; i < q.values.size(); ++i) {
            qq += q.values[i] * q.values[i];
            ee += e.vector.values[i] * e.vector.values[i];
        }
        const double qn = std::sqrt(qq);
        const double en = std::sqrt(ee);
        double s = 0;
        for (std::size_t i = 0; i < q.values.size(); ++i) {
            s += (q.values[i] / qn) * (e.vector.values[i] / en);
        }
        all.emplace_back(s, e.chunk_id);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
        ids.push_back(all[i].second);
    }
    return ids;
}

std::vector<std::string> ids_of(const std::vector<RetrievalHit>& hits) {
    std::vector<std::string> ids;
    for (const auto& h : hits) {
        ids.push_back(h.chunk_id);
    }
    return ids;
}

IndexEntry entry(const std::string& id, EmbeddingVector v, std::string text = "") {
    return IndexEntry{id, std::move(v), {{"uri", "file://" + id}}, std::move(text)};
}

}  // namespace

TEST_CASE("mock embedder is deterministic, unit length and 64-dimensional") {
    MockEmbedder e;
    const auto v = e.embed({"Castello Monforte", "Castello Monforte", "spiaggia di Termoli"});
    REQUIRE(v.size() == 3);
    CHECK(v[0] == v[1]);
    for (const auto& x : v) {
        CHECK(x.dim() == 64);
        CHECK(cosine(x, x) == doctest::Approx(1.0).epsilon(1e-12));
        EmbeddingVector neg = x;
        for (double& d : neg.values) {
            d = -d;
        }
        CHECK(cosine(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    CHECK(MockEmbedder(1).embed_one("museo") != MockEmbedder(2).embed_one("museo"));
    CHECK_THROWS_AS(e.embed({}), ValidationError);
    CHECK(e.embed_one("...").dim() == 64);
}

TEST_CASE("mock embedder ranks lexical neighbours above unrelated text") {
    MockEmbedder e;
    const auto q = e.embed_one("museo archeologico sannitico");
    const auto near = e.embed_one("il museo sannitico di Campobasso");
    const auto far = e.embed_one("spiaggia sabbiosa e mare");
    CHECK(cosine(q, near) > cosine(q, far));
}

TEST_CASE("recorded provider payloads parse to the hand-extracted values") {
    const auto cohere = parse_cohere_embeddings(nlohmann::json::parse(files::read_all(testing::fixture("cohere_embed_recorded.json"))));
    REQUIRE(cohere.size() == 2);
    CHECK(cohere[0].values == std::vector<double>{0.0213623, -0.0487061, 0.0115967, 0.0731201});
    CHECK(cohere[1].values == std::vector<double>{-0.0153809, 0.0296021, 0.0642090, -0.0081177});

    const auto flat = parse_cohere_embeddings(nlohmann::json::parse(R"({"embeddings": [[1.5, 2.0]]})"));
    CHECK(flat.at(0).values == std::vector<double>{1.5, 2.0});

    const auto openai = parse_openai_embeddings(nlohmann::json::parse(files::read_all(testing::fixture("openai_embed_recorded.json"))));
    REQUIRE(openai.size() == 2);
    CHECK(openai[0].values == std::vector<double>{-0.0625, 0.75, 0.0});
    CHECK(openai[1].values == std::vector<double>{0.5, -0.25, 0.125});

    CHECK_THROWS_AS(parse_cohere_embeddings(nlohmann::json::parse(R"({"embeddings": [[]]})")), ValidationError);
}

TEST_CASE("http embedder batches requests and reports failed batch indices") {
    testing::LocalServer srv;
    std::atomic<int> calls{0};
    srv.server.Post("/v1/embed", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("model") == "embed-multilingual-v3.0");
        CHECK(body.at("input_type") == "search_document");
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& t : body.at("texts")) {
            if (t.get<std::string>() == "boom") {
                res.status = 503;
                return;
            }
            rows.push_back({static_cast<double>(t.get<std::string>().size()), 1.0});
        }
        res.set_content(nlohmann::json{{"embeddings", rows}}.dump(), "application/json");
    });
    srv.start();

    HttpEmbedderConfig cfg;
    cfg.base_url = srv.base_url();
    cfg.dim = 2;
    cfg.batch_size = 2;
    cfg.max_attempts = 2;
    HttpEmbedder e(cfg);
    const auto v = e.embed({"a", "bb", "ccc"});
    REQUIRE(v.size() == 3);
    CHECK(v[2].values == std::vector<double>{3.0, 1.0});
    CHECK(calls == 2);

    try {
        e.embed({"a", "bb", "boom", "dddd", "e"});
        FAIL("expected provider error");
    } catch (const ProviderError& err) {
        CHECK(err.retryable());
        CHECK(err.failed_indices() == std::vector<std::size_t>{2, 3});
    }
}

TEST_CASE("http embedder surfaces connection failures as retryable") {
    HttpEmbedderConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    cfg.max_attempts = 1;
    cfg.timeout_ms = 500;
    HttpEmbedder e(cfg);
    try {
        e.embed({"x"});
        FAIL("expected provider error");
    } catch (const ProviderError& err) {
        CHECK(err.retryable());
        CHECK(err.failed_indices() == std::vector<std::size_t>{0});
    }
}

TEST_CASE("index add replaces duplicates and rejects wrong dims") {
    std::mt19937_64 rng(7);
    VectorIndex index(64);
    std::vector<IndexEntry> batch;
    for (int i = 0; i < 10; ++i) {
        batch.push_back(entry("c" + std::to_string(i), random_vector(rng, 64)));
    }
    CHECK(index.add(batch) == 10);
    CHECK(index.size() == 10);

    const auto latest = random_vector(rng, 64);
    index.add({entry("c3", latest)});
    CHECK(index.size() == 10);
    CHECK(index.query_vector(latest, 1).at(0).chunk_id == "c3");

    CHECK_THROWS_AS(index.add({entry("bad", random_vector(rng, 63))}), ValidationError);
    EmbeddingVector nan;
    nan.values.assign(64, 0.0);
    nan.values[5] = std::nan("");
    CHECK_THROWS_AS(index.add({entry("nan", nan)}), ValidationError);
    CHECK(index.size() == 10);
    CHECK_THROWS_AS(index.query_vector(latest, 0), ValidationError);
}

TEST_CASE("query returns self first and handles k beyond size") {
    MockEmbedder e;
    VectorIndex index(64);
    const std::vector<std::string> texts = {"Castello Monforte sulla collina", "Museo Sannitico con reperti",
                                            "Cattedrale della Santissima Trinità", "Spiaggia di Sant'Antonio"};
    std::vector<IndexEntry> entries;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        entries.push_back(entry("d:" + std::to_string(i), e.embed_one(texts[i]), texts[i]));
    }
    index.add(entries);
    const auto hits = index.query(texts[1], 2, e);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].chunk_id == "d:1");
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hits[0].text == texts[1]);
    CHECK(index.query(texts[0], 50, e).size() == 4);

    const auto filtered = index.query(texts[1], 10, e, [](const Metadata& m) { return m.at("uri") != "file://d:1"; });
    CHECK(filtered.size() == 3);
    CHECK(std::none_of(filtered.begin(), filtered.end(), [](const auto& h) { return h.chunk_id == "d:1"; }));

    VectorIndex empty(64);
    CHECK(empty.query("anything", 3, e).empty());
}

TEST_CASE("query equals brute-force search on random indexes, ties included") {
    std::mt19937_64 rng(20240611);
    for (const std::size_t n : {1u, 17u, 300u, 5000u}) {
        VectorIndex index(16);
        std::vector<IndexEntry> entries;
        for (std::size_t i = 0; i < n; ++i) {
            entries.push_back(entry(fmt::format("k{:05}", (i * 7919) % 100000), random_vector(rng, 16)));
        }
        // Exact duplicates create genuine score ties.
        for (std::size_t i = 0; i < std::min<std::size_t>(n, 20); ++i) {
            entries.push_back(entry("dup" + std::to_string(i), entries[i].vector));
        }
        index.add(entries);
        for (int q = 0; q < 20; ++q) {
            const auto query = q % 5 == 0 ? entries[static_cast<std::size_t>(q) % entries.size()].vector
                                          : random_vector(rng, 16);
            for (const std::size_t k : {1u, 5u, 20u, 100u}) {
                CHECK(ids_of(index.query_vector(query, k)) == brute_force(entries, query, k));
            }
        }
    }
}

TEST_CASE("snapshot round-trips bit-exactly and refuses unknown versions") {
    testing::TempDir dir;
    std::mt19937_64 rng(3);
    VectorIndex index(8);
    std::vector<IndexEntry> entries;
    for (int i = 0; i < 25; ++i) {
        auto e = entry("s" + std::to_string(i), random_vector(rng, 8), "testo " + std::to_string(i));
        e.metadata["language"] = "it";
        entries.push_back(e);
    }
    index.add(entries);
    const auto path = dir.path() / "index.bin";
    index.save(path);
    const auto loaded = VectorIndex::load(path);
    CHECK(loaded.dim() == 8);
    CHECK(loaded.entries() == index.entries());
    loaded.save(dir.path() / "again.bin");
    CHECK(files::read_all(path) == files::read_all(dir.path() / "again.bin"));

    auto bytes = files::read_all(path);
    bytes[8] = 2;
    files::write_atomic(dir.path() / "v2.bin", bytes);
    CHECK_THROWS_AS(VectorIndex::load(dir.path() / "v2.bin"), ValidationError);
    files::write_atomic(dir.path() / "short.bin", bytes.substr(0, 30));
    CHECK_THROWS_AS(VectorIndex::load(dir.path() / "short.bin"), ValidationError);
}

TEST_CASE("augment_prompt follows score order and the token budget") {
    const std::string preamble = "Sei zIA.";
    SUBCASE("no hits and no POIs") {
        const auto p = augment_prompt(preamble, "Dove mangiare?", {}, {}, 1200);
        CHECK(p.text == "Sei zIA.\n\nQuestion: Dove mangiare?\n");
        CHECK(p.block_tokens == 0);
    }
    SUBCASE("budget admits the top two of three") {
        std::vector<RetrievalHit> hits = {
            {"a:0", 0.2, {{"uri", "https://a"}}, "uno due tre"},
            {"b:0", 0.9, {{"uri", "https://b"}}, "quattro cinque sei"},
            {"c:0", 0.5, {{"uri", "https://c"}}, "sette otto nove"},
        };
        // each block: "[n]" "(source:" "<uri>)" + 3 words = 6 tokens
        const auto p = augment_prompt(preamble, "Cosa vedere?", hits, {}, 12);
        CHECK(p.chunk_ids == std::vector<std::string>{"b:0", "c:0"});
        CHECK(p.block_tokens == 12);
        CHECK(p.text.find("[1] (source: https://b) quattro cinque sei") != std::string::npos);
        CHECK(p.text.find("[2] (source: https://c) sette otto nove") != std::string::npos);
        CHECK(p.text.find("https://a") == std::string::npos);
    }
    SUBCASE("pure function") {
        std::vector<RetrievalHit> hits = {{"x:1", 0.4, {{"uri", "u"}}, "testo"}};
        CHECK(augment_prompt(preamble, "q", hits, {}, 50).text == augment_prompt(preamble, "q", hits, {}, 50).text);
    }
}

TEST_CASE("augment_prompt never exceeds the budget on random inputs") {
    catalog::Catalog c;
    testing::load_fixture_catalog(c);
    const auto pois = c.all();
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> words(1, 60);
    std::uniform_real_distribution<double> score(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<RetrievalHit> hits;
        const int n = trial % 9;
        for (int i = 0; i < n; ++i) {
            std::string t;
            for (int w = words(rng); w > 0; --w) {
                t += "parola ";
            }
            hits.push_back({"h" + std::to_string(i), score(rng), {{"uri", "u" + std::to_string(i)}}, t});
        }
        const std::size_t budget = static_cast<std::size_t>(trial * 7 % 400);
        std::vector<catalog::Poi> live(pois.begin(), pois.begin() + trial % 6);
        const auto p = augment_prompt("pre", "domanda", hits, live, budget);
        CHECK(p.block_tokens <= budget);
        std::size_t counted = 0;
        for (std::size_t i = 0; i < p.chunk_ids.size(); ++i) {
            const auto& h = *std::find_if(hits.begin(), hits.end(), [&](const auto& x) { return x.chunk_id == p.chunk_ids[i]; });
            counted += count_tokens(fmt::format("[{}] (source: {}) {}", i + 1, h.metadata.at("uri"), h.text));
            CHECK(p.text.find("(source: " + h.metadata.at("uri") + ")") != std::string::npos);
        }
        for (const auto& id : p.poi_ids) {
            counted += count_tokens(poi_fact(*c.get(id)));
        }
        CHECK(counted == p.block_tokens);
    }
}
