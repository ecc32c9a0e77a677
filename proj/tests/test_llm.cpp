#include "grounding_harness.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/llm/chat.hpp"
#include "itinera/llm/grounding.hpp"
#include "itinera/llm/narration.hpp"
#include "itinera/llm/persona.hpp"
#include "local_server.hpp"
#include "test_support.hpp"

#include <atomic>
#include <doctest.h>

using namespace itinera;
using namespace itinera::llm;

namespace {

PersonaProfile persona() {
    return load_persona(testing::data_dir() / "persona.json");
}

std::vector<catalog::Poi> catalog_pois() {
    catalog::Catalog c;
    testing::load_fixture_catalog(c);
    return c.all();
}

CompletionRequest user_request(const std::string& text) {
    CompletionRequest r;
    r.system = "sys";
    r.messages.push_back({"user", text});
    return r;
}

planner::Itinerary two_day_plan(const std::vector<catalog::Poi>& pois, const std::vector<std::string>& ids) {
    planner::Itinerary it;
    for (int d = 0; d < 2; ++d) {
        planner::DaySchedule day;
        day.date = *make_date(2025, 7, 7 + d);
        it.days.push_back(day);
    }
    int t = 540;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto p = *std::find_if(pois.begin(), pois.end(), [&](const auto& x) { return x.id == ids[i]; });
        it.days[i % 2].visits.push_back(planner::Visit{p.id, p.name, t, t + p.visit_duration, p.cost_per_person, 1.0});
        t += 100;
    }
    it.totals = planner::recompute_totals(it);
    return it;
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("persona loads both languages and rejects others") {
    const auto p = persona();
    CHECK(p.name == "zIA");
    CHECK_FALSE(p.style("it").preamble.empty());
    CHECK_FALSE(p.style("en").preamble.empty());
    CHECK_THROWS_AS(p.style("fr"), ValidationError);
    CHECK(fill("Day {n} ({date}) {n}", {{"n", "2"}, {"date", "x"}}) == "Day 2 (x) 2");

    testing::TempDir dir;
    files::write_atomic(dir.path() / "p.json", R"({"name": "zIA", "styles": {"it": {}}})");
    CHECK_THROWS_AS(load_persona(dir.path() / "p.json"), ValidationError);
}

TEST_CASE("completion requests are validated") {
    CompletionRequest r;
    CHECK_THROWS_AS(validate(r), ValidationError);
    r = user_request("ciao");
    r.temperature = 2.5;
    CHECK_THROWS_AS(validate(r), ValidationError);
    r.temperature = 0.7;
    CHECK_NOTHROW(validate(r));
}

TEST_CASE("mock provider is deterministic") {
    MockChatProvider a;
    MockChatProvider b;
    const auto req = user_request("Cosa c'è da vedere?");
    CHECK(a.complete(req) == a.complete(req));
    CHECK(a.complete(req) == b.complete(req));
    MockChatProvider down(MockOptions{7, {}, {}, true});
    CHECK_THROWS_AS(down.complete(req), ProviderError);
}

TEST_CASE("recorded chat payload parses to the hand-read content") {
    const auto payload = nlohmann::json::parse(files::read_all(testing::fixture("openai_chat_recorded.json")));
    CHECK(parse_chat_completion(payload) ==
          "Allora, tesoro! Il Castello Monforte apre alle 9:30, vai presto che c'è un bel panorama.");
    CHECK_THROWS_AS(parse_chat_completion(nlohmann::json::parse(R"({"choices": []})")), ProviderError);

    auto req = user_request("ciao");
    req.temperature = 0.7;
    const auto body = build_chat_body(req, "gpt-4o");
    CHECK(body["model"] == "gpt-4o");
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "ciao");
    CHECK(body["temperature"] == 0.7);
}

TEST_CASE("openai-compatible provider retries transient failures") {
    testing::LocalServer srv;
    std::atomic<int> calls{0};
    std::string auth;
    srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        if (++calls == 1) {
            res.status = 503;
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        if (body["messages"].back()["content"] == "bad") {
            res.status = 400;
            return;
        }
        res.set_content(R"({"choices": [{"message": {"role": "assistant", "content": "ok"}}]})", "application/json");
    });
    srv.start();

    auto clock = std::make_shared<ManualClock>();
    OpenAiConfig cfg;
    cfg.base_url = srv.base_url() + "/v1";
    cfg.api_key = "k";
    cfg.backoff_ms = 200;
    OpenAiChatProvider p(cfg, clock);
    const auto t0 = clock->now_ms();
    CHECK(p.complete(user_request("hi")) == "ok");
    CHECK(calls == 2);
    CHECK(auth == "Bearer k");
    const auto waited = clock->now_ms() - t0;
    CHECK(waited >= 100);
    CHECK(waited <= 300);

    try {
        p.complete(user_request("bad"));
        FAIL("expected rejection");
    } catch (const ProviderError& e) {
        CHECK_FALSE(e.retryable());
    }
    CHECK(calls == 3);

    OpenAiConfig gone;
    gone.base_url = "http://127.0.0.1:1/v1";
    gone.max_attempts = 2;
    gone.timeout_ms = 300;
    OpenAiChatProvider down(gone, clock);
    try {
        down.complete(user_request("hi"));
        FAIL("expected provider error");
    } catch (const ProviderError& e) {
        CHECK(e.retryable());
    }
}

TEST_CASE("verify_grounding flags fabricated names only") {
    const std::set<std::string> allowed = {"Castello Monforte", "Museo Sannitico", "Campobasso", "zIA"};
    CHECK(verify_grounding("Giorno 1: alle 09:00 Castello Monforte, poi Museo Sannitico a Campobasso.", allowed).ok());
    const auto r = verify_grounding("Dopo il Castello Monforte, visita il Museo del Vento.", allowed);
    REQUIRE(r.ungrounded.size() == 1);
    CHECK(r.ungrounded[0].text == "Museo del Vento");
    CHECK(r.grounded_count == 1);
    CHECK(std::string("Dopo il Castello Monforte, visita il Museo del Vento.").substr(r.ungrounded[0].offset, r.ungrounded[0].length) == "Museo del Vento");

    // Accent folding and one typo are tolerated; partial names are fine.
    CHECK(verify_grounding("Il castello è il Castelo Monforte, detto Monforte.", allowed).ok());
    CHECK(verify_grounding("Visit the “Museo Sannitico” today.", allowed).ok());
    CHECK_FALSE(verify_grounding("Visit the “Museo Zanzibar” today.", allowed).ok());
    CHECK(verify_grounding("Here is your plan. Then we eat!", allowed).ok());
    CHECK(extract_mentions("Vai al Museo dei Misteri e poi a Termoli.").size() == 2);
}

TEST_CASE("grounding mutation harness: injected fakes detected, clean narrations pass") {
    const auto pois = catalog_pois();
    const auto p = persona();
    std::mt19937_64 rng(99);
    int detected = 0;
    int false_positives = 0;
    for (int i = 0; i < 60; ++i) {
        const auto s = testing::sample_narration(rng, pois, p);
        const auto clean = verify_grounding(s.text, s.allowed);
        INFO(s.text);
        if (!clean.ok()) {
            ++false_positives;
            MESSAGE("false positive: " << clean.ungrounded[0].text);
        }
        const auto fake = testing::fabricated_name(rng, pois);
        const auto mutated = testing::inject(rng, s, fake);
        const auto report = verify_grounding(mutated, s.allowed);
        if (!report.ok()) {
            ++detected;
        } else {
            MESSAGE("missed: " << fake << " in " << mutated);
        }
    }
    CHECK(detected == 60);
    CHECK(false_positives == 0);
}

TEST_CASE("narration: empty plan, mock contract, forced fallback, provider down") {
    const auto pois = catalog_pois();
    const auto p = persona();
    MockChatProvider mock;

    const auto empty = narrate_itinerary(planner::Itinerary{}, pois, p, "it", mock);
    CHECK(empty.text == p.style("it").no_plan);
    CHECK(narrate_itinerary(planner::Itinerary{}, pois, p, "en", mock).text == p.style("en").no_plan);

    const auto plan = two_day_plan(pois, {"cb-castello-monforte", "cb-museo-sannitico", "cb-trattoria-sannita",
                                          "cb-villa-de-capoa", "cb-cattedrale"});
    for (const auto* lang : {"it", "en"}) {
        const auto r = narrate_itinerary(plan, pois, p, lang, mock);
        CHECK(r.source == NarrationSource::model);
        CHECK(r.report.ok());
        for (const auto& d : plan.days) {
            for (const auto& v : d.visits) {
                CHECK(count(r.text, v.poi_name) == 1);
            }
        }
    }

    MockChatProvider liar(MockOptions{7, "Museo del Vento", {}, false});
    const auto fallback = narrate_itinerary(plan, pois, p, "it", liar);
    CHECK(fallback.source == NarrationSource::template_text);
    CHECK(fallback.model_calls == 2);
    CHECK(fallback.text == template_narration(plan, p, "it"));
    CHECK(fallback.text.find("Vento") == std::string::npos);
    CHECK(fallback.report.ok());

    MockChatProvider down(MockOptions{7, {}, {}, true});
    const auto degraded = narrate_itinerary(plan, pois, p, "en", down);
    CHECK(degraded.degraded);
    CHECK(degraded.text == template_narration(plan, p, "en"));
}

TEST_CASE("structured extraction through the mock") {
    MockChatProvider mock;
    const auto u = extract_structured("3 nights in Campobasso", "dates", "en", mock);
    CHECK(u.nights == 3);
    CHECK(u.destination == "Campobasso");

    MockChatProvider malformed(MockOptions{7, {}, std::string("sure! {destination: Campobasso"), false});
    CHECK(extract_structured("whatever", "destination", "en", malformed).empty());

    MockChatProvider hostile(MockOptions{7, {}, std::string(R"({"budget_total": -5})"), false});
    CHECK(extract_structured("spend less than nothing", "budget", "en", hostile).empty());

    MockChatProvider wrapped(MockOptions{7, {}, std::string("Here you go: {\"adults\": 2, \"preferences\": [\"museum\"]} hope it helps"), false});
    const auto w = extract_structured("two of us, museums", "party", "en", wrapped);
    CHECK(w.adults == 2);
    CHECK(w.preference_weights.at("museum") == 1.0);

    MockChatProvider down(MockOptions{7, {}, {}, true});
    CHECK(extract_structured("3 nights in Campobasso", "dates", "en", down).empty());
}
