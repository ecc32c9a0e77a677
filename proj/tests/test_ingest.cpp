#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/text.hpp"
#include "itinera/ingest/chunker.hpp"
#include "itinera/ingest/crawler.hpp"
#include "itinera/ingest/html_text.hpp"
#include "itinera/ingest/manifest.hpp"
#include "itinera/ingest/robots.hpp"
#include "itinera/ingest/sources.hpp"
#include "itinera/ingest/url.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <random>

using namespace itinera;
using namespace itinera::ingest;

namespace {

KnowledgeDocument doc_with_tokens(std::size_t n) {
    KnowledgeDocument d;
    d.doc_id = make_doc_id(Source::directory, "synthetic");
    d.uri = "synthetic";
    d.title = "T";
    for (std::size_t i = 0; i < n; ++i) {
        d.body += "w" + std::to_string(i) + (i % 17 == 16 ? "\n" : " ");
    }
    return d;
}

std::filesystem::path site_root() {
    return testing::fixture("site");
}

}  // namespace

TEST_CASE("extract_text basic html") {
    const auto r = extract_text("<html><title>T</title><body><p>ciao</p></body>", ContentKind::html, "u");
    REQUIRE(r);
    CHECK(r->title == "T");
    CHECK(r->body == "ciao");
}

TEST_CASE("extract_text rejects navigation-only pages") {
    CHECK_FALSE(extract_text("<html><body><nav><a href='/'>Home</a><a href='/x'>X</a></nav></body></html>",
                             ContentKind::html, "u"));
    CHECK_FALSE(extract_text("<div class=\"menu\"><ul><li><a>Uno</a></li></ul></div>", ContentKind::html, "u"));
    CHECK_FALSE(extract_text("   \n\t ", ContentKind::plain_text, "u"));
}

TEST_CASE("extract_text title fallbacks, scripts and entities") {
    auto r = extract_text("<body><h2>Cosa <em>mangiare</em></h2><script>var x = '<p>no</p>';</script><p>caf&egrave; &amp; t&#232;</p></body>",
                          ContentKind::html, "http://x/y");
    REQUIRE(r);
    CHECK(r->title == "Cosa mangiare");
    CHECK(r->body == "Cosa mangiare\ncafè & tè");

    r = extract_text("<p>solo testo</p>", ContentKind::html, "http://x/y");
    REQUIRE(r);
    CHECK(r->title == "http://x/y");

    r = extract_text("# Titolo\n\ncorpo   del\ttesto\n", ContentKind::markdown, "a.md");
    REQUIRE(r);
    CHECK(r->title == "Titolo");
    CHECK(r->body == "Titolo\ncorpo del testo");
}

TEST_CASE("extract_text decodes invalid utf8 lossily") {
    const std::string raw = std::string("<p>citt") + '\xE0' + " bella</p>";
    const auto r = extract_text(raw, ContentKind::html, "u");
    REQUIRE(r);
    CHECK(r->body == "citt\xEF\xBF\xBD bella");
}

TEST_CASE("site export post matches the hand-cleaned golden text") {
    const auto result = ingest_site_export(testing::fixture("export/posts.json"));
    REQUIRE(result.documents.size() == 2);
    const auto& festa = result.documents[0];
    CHECK(festa.uri == "https://molise.example/2024/05/festa-dei-misteri/");
    CHECK(festa.title == "La Festa dei Misteri – Corpus Domini");
    CHECK(festa.body == files::read_all(testing::fixture("export/golden/101.txt")));
    CHECK(festa.source == Source::site_export);
    CHECK(festa.language == "it");
    REQUIRE(result.skipped.size() == 1);
    CHECK(result.skipped[0].reason == "empty");
}

TEST_CASE("extract_links") {
    const auto links = extract_links("<a href=\"/a\">x</a><!-- <a href=\"/hidden\"> --><A HREF='b.html?x=1&amp;y=2'>y</A><a name=z>");
    CHECK(links == std::vector<std::string>{"/a", "b.html?x=1&y=2"});
}

TEST_CASE("chunk window arithmetic") {
    SUBCASE("fits in one window") {
        const auto chunks = chunk(doc_with_tokens(100), {1000, 0});
        REQUIRE(chunks.size() == 1);
        CHECK(chunks[0].token_count == 100);
    }
    SUBCASE("stride 800 over 2500 tokens") {
        const auto chunks = chunk(doc_with_tokens(2500), {1000, 200});
        REQUIRE(chunks.size() == 3);
        // Hand-computed starts 0, 800, 1600; token k is "w<k>".
        CHECK(chunks[0].text.starts_with("w0 "));
        CHECK(chunks[1].text.starts_with("w800 "));
        CHECK(chunks[2].text.starts_with("w1600 "));
        CHECK(chunks[0].token_count == 1000);
        CHECK(chunks[1].token_count == 1000);
        CHECK(chunks[2].token_count == 900);
        CHECK(chunks[2].chunk_id == chunks[0].chunk_id.substr(0, chunks[0].chunk_id.size() - 1) + "2");
    }
    SUBCASE("overlap must be smaller than the window") {
        CHECK_THROWS_AS(chunk(doc_with_tokens(10), {10, 10}), ValidationError);
        CHECK_THROWS_AS(chunk(doc_with_tokens(10), {10, 11}), ValidationError);
    }
}

TEST_CASE("chunk coverage and size properties on random documents") {
    std::mt19937 rng(3);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3000)(rng);
        const std::size_t max = std::uniform_int_distribution<std::size_t>(1, 500)(rng);
        const std::size_t overlap = std::uniform_int_distribution<std::size_t>(0, max - 1)(rng);
        const auto doc = doc_with_tokens(n);
        const auto chunks = chunk(doc, {max, overlap});
        std::vector<std::string> rebuilt;
        std::set<std::string> ids;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const auto tokens = text::split_whitespace(chunks[i].text);
            CHECK(tokens.size() == chunks[i].token_count);
            CHECK(chunks[i].token_count > 0);
            CHECK(chunks[i].token_count <= max);
            CHECK(ids.insert(chunks[i].chunk_id).second);
            rebuilt.insert(rebuilt.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i == 0 ? 0 : overlap), tokens.end());
        }
        CHECK(rebuilt == text::split_whitespace(doc.body));
    }
}

TEST_CASE("dedup") {
    Chunk a{"d:0", "uno due", 2, {}};
    Chunk b{"d:1", "tre", 1, {}};
    CHECK(dedup({a, b}) == std::vector<Chunk>{a, b});
    Chunk a2{"e:0", "uno due", 2, {}};
    CHECK(dedup({a, b, a2}) == std::vector<Chunk>{a, b});
    Chunk a3{"f:0", "  uno \n due ", 2, {}};
    CHECK(dedup({a3, a, b}) == std::vector<Chunk>{a3, b});
}

TEST_CASE("ingest_directory") {
    SUBCASE("empty directory") {
        testing::TempDir dir;
        const auto r = ingest_directory(dir.path());
        CHECK(r.documents.empty());
        CHECK(r.skipped.empty());
    }
    SUBCASE("fixture directory with one corrupt file") {
        const auto r = ingest_directory(testing::fixture("docs"));
        REQUIRE(r.documents.size() == 2);
        CHECK(r.documents[0].uri == "guida.md");
        CHECK(r.documents[0].title == "Guida rapida a Termoli");
        CHECK(r.documents[1].uri == "orari.txt");
        CHECK(r.documents[1].title == "orari.txt");
        REQUIRE(r.skipped.size() == 1);
        CHECK(r.skipped[0].uri == "corrotto.html");
        CHECK(r.skipped[0].reason == "binary content");

        const auto again = ingest_directory(testing::fixture("docs"));
        CHECK(again.documents == r.documents);
        CHECK(again.skipped == r.skipped);
    }
    SUBCASE("missing directory") {
        CHECK_THROWS_AS(ingest_directory("/nonexistent/itinera"), ValidationError);
    }
}

TEST_CASE("doc ids are stable hashes of source and uri") {
    CHECK(make_doc_id(Source::crawl, "http://a/") == make_doc_id(Source::crawl, "http://a/"));
    CHECK(make_doc_id(Source::crawl, "http://a/") != make_doc_id(Source::directory, "http://a/"));
    CHECK(make_doc_id(Source::crawl, "x").size() == 16);
}

TEST_CASE("url parsing and resolution") {
    const auto base = Url::parse("HTTP://Molise.Example:80/a/b/c.html?q=1#frag");
    REQUIRE(base);
    CHECK(base->str() == "http://molise.example/a/b/c.html?q=1");
    CHECK(base->resolve("d.html")->str() == "http://molise.example/a/b/d.html");
    CHECK(base->resolve("../d.html")->str() == "http://molise.example/a/d.html");
    CHECK(base->resolve("/x/./y/../z")->str() == "http://molise.example/x/z");
    CHECK(base->resolve("//other.example/p")->str() == "http://other.example/p");
    CHECK(base->resolve("?k=v")->str() == "http://molise.example/a/b/c.html?k=v");
    CHECK(base->resolve("#top")->str() == "http://molise.example/a/b/c.html?q=1");
    CHECK_FALSE(base->resolve("mailto:x@y"));
    CHECK_FALSE(base->resolve("javascript:void(0)"));
    CHECK(Url::parse("https://h:8443")->authority() == "h:8443");
    CHECK(Url::parse("https://h:443/")->authority() == "h");
    CHECK_FALSE(Url::parse("ftp://h/"));
}

TEST_CASE("robots rules") {
    const auto rules = RobotsRules::parse(
        "User-agent: otherbot\nDisallow: /\n\nUser-agent: *\nDisallow: /private/\nAllow: /private/open.html\n"
        "Disallow: /*.pdf$\nCrawl-delay: 2\n",
        "itinera-crawler/1.0");
    CHECK(rules.allowed("/index.html"));
    CHECK_FALSE(rules.allowed("/private/x.html"));
    CHECK(rules.allowed("/private/open.html"));
    CHECK_FALSE(rules.allowed("/docs/file.pdf"));
    CHECK(rules.allowed("/docs/file.pdf?download=1"));
    CHECK(rules.crawl_delay_seconds() == doctest::Approx(2.0));

    const auto specific = RobotsRules::parse("User-agent: itinera-crawler\nDisallow: /x\n\nUser-agent: *\nDisallow: /\n",
                                             "itinera-crawler/1.0");
    CHECK(specific.allowed("/y"));
    CHECK_FALSE(specific.allowed("/x/1"));
    CHECK(RobotsRules::allow_all().allowed("/anything"));
}

TEST_CASE("crawl the fixture site exhaustively") {
    FixtureSiteFetcher fetcher(site_root());
    ManualClock clock;
    CrawlOptions options;
    options.max_pages = 10;
    options.delay_ms = 500;
    const auto r = crawl({"http://molise.example/"}, options, fetcher, clock);
    REQUIRE(r.documents.size() == 5);
    for (const auto& e : r.requests) {
        CHECK(e.host == "molise.example");
        CHECK(e.url.find("private") == std::string::npos);
    }
    bool robots_skip = false;
    for (const auto& s : r.skipped) {
        robots_skip = robots_skip || s.reason == "disallowed by robots.txt";
    }
    CHECK(robots_skip);
    CHECK(r.requests.front().url == "http://molise.example/robots.txt");
}

TEST_CASE("crawl stops at max_pages in breadth-first order") {
    FixtureSiteFetcher fetcher(site_root());
    ManualClock clock;
    CrawlOptions options;
    options.max_pages = 3;
    options.delay_ms = 100;
    const auto r = crawl({"http://molise.example/"}, options, fetcher, clock);
    // Hand-traced: "/" links castello, musei, cucina (depth 1) before borgo (depth 2).
    REQUIRE(r.documents.size() == 3);
    CHECK(r.documents[0].uri == "http://molise.example/");
    CHECK(r.documents[1].uri == "http://molise.example/castello.html");
    CHECK(r.documents[2].uri == "http://molise.example/musei.html");
    CHECK(r.documents[0].title == "Visita Campobasso");
    CHECK(r.documents[0].body.find("Cookie policy") == std::string::npos);
    CHECK(r.documents[0].body.find("analytics") == std::string::npos);
}

TEST_CASE("crawl depth limit") {
    FixtureSiteFetcher fetcher(site_root());
    ManualClock clock;
    CrawlOptions options;
    options.max_depth = 0;
    const auto r = crawl({"http://molise.example/"}, options, fetcher, clock);
    CHECK(r.documents.size() == 1);
}

TEST_CASE("crawl politeness spacing on a manual clock") {
    FixtureSiteFetcher fetcher(site_root());
    ManualClock clock(0, 7);
    CrawlOptions options;
    options.delay_ms = 1000;
    options.workers = 3;
    const auto r = crawl({"http://molise.example/", "https://other.example/tremiti.html"}, options, fetcher, clock);
    std::map<std::string, std::int64_t> last;
    for (const auto& e : r.requests) {
        if (last.contains(e.host)) {
            CHECK(e.at_ms - last[e.host] >= 1000);
        }
        last[e.host] = e.at_ms;
    }
    CHECK(r.documents.size() == 6);
}

TEST_CASE("crawl records fetch failures without aborting") {
    struct FlakyFetcher : Fetcher {
        FixtureSiteFetcher inner{testing::fixture("site")};
        FetchResponse fetch(const Url& url) override {
            if (url.path == "/musei.html") {
                throw ProviderError("connection reset", true);
            }
            if (url.path == "/cucina.html") {
                return {503, "", "text/html", "", std::nullopt};
            }
            return inner.fetch(url);
        }
    } fetcher;
    ManualClock clock;
    const auto r = crawl({"http://molise.example/"}, {}, fetcher, clock);
    CHECK(r.documents.size() == 3);
    int failures = 0;
    for (const auto& s : r.skipped) {
        if (s.reason.starts_with("fetch failed") || s.status == 503) {
            ++failures;
        }
    }
    CHECK(failures == 2);
}

TEST_CASE("manifest build is deterministic and round-trips") {
    FixtureSiteFetcher fetcher(site_root());
    ManualClock clock1;
    ManualClock clock2;
    const auto a = crawl({"http://molise.example/"}, {}, fetcher, clock1);
    const auto b = crawl({"http://molise.example/"}, {}, fetcher, clock2);
    const auto ma = build_manifest(a.documents, a.skipped, {40, 8});
    const auto mb = build_manifest(b.documents, b.skipped, {40, 8});
    CHECK(serialize_manifest(ma) == serialize_manifest(mb));
    CHECK(ma.chunks.size() >= ma.documents.size());
    const auto parsed = parse_manifest(serialize_manifest(ma));
    CHECK(serialize_manifest(parsed) == serialize_manifest(ma));
}

TEST_CASE("events feed connector") {
    EventsFeedConfig off;
    off.feed = testing::fixture("events_feed.json").string();
    const auto disabled = EventsFeedConnector(off).poll();
    CHECK(disabled.documents.empty());
    CHECK(disabled.skipped.at(0).reason == "events feed disabled");

    auto on = off;
    on.enabled = true;
    const auto r = EventsFeedConnector(on).poll();
    REQUIRE(r.documents.size() == 2);
    CHECK(r.documents[0].source == Source::events_feed);
    CHECK(r.documents[0].uri == "https://molise.example/eventi/misteri");
    CHECK(r.documents[1].uri == "event:ev-2");
    CHECK(r.documents[0].body.find("Where: Campobasso") != std::string::npos);
    CHECK(r.skipped.size() == 1);
}
