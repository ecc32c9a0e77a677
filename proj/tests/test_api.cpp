#include "api_support.hpp"

#include "itinera/api/export.hpp"
#include "itinera/catalog/travel_matrix.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/text.hpp"
#include "itinera/ingest/chunker.hpp"
#include "itinera/ingest/sources.hpp"
#include "itinera/llm/narration.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>

using namespace itinera;
using namespace itinera::api;
using dialogue::Phase;
using nlohmann::json;

namespace {

const std::vector<std::string> kItScript = {"Campobasso", "dal 10 al 12 giugno", "siamo 2 adulti",
                                            "musei, storia e buon cibo", "budget 400 euro"};
const std::vector<std::string> kEnScript = {"Termoli", "from June 3 to June 5", "2 adults and 1 child",
                                            "beach and food", "300 euro"};

json post(httplib::Client& c, const std::string& path, const json& body, int* status = nullptr) {
    const auto res = c.Post(path.c_str(), body.dump(), "application/json");
    REQUIRE(res);
    if (status != nullptr) {
        *status = res->status;
    }
    return json::parse(res->body);
}

/// Session state with wall-clock fields and the id blanked, for comparing runs.
dialogue::SessionState timeless(dialogue::SessionState s) {
    for (auto& e : s.transcript) {
        e.ts = 0;
        for (auto pos = e.text.find(s.session_id); pos != std::string::npos; pos = e.text.find(s.session_id)) {
            e.text.replace(pos, s.session_id.size(), "<id>");
        }
    }
    s.session_id.clear();
    s.created_ms = 0;
    for (auto& f : s.feedback) {
        f.ts = 0;
    }
    return s;
}

std::filesystem::path golden_path() {
    return testing::fixture("api/export_it.md");
}

}  // namespace

TEST_CASE("config: defaults, file, environment, unknown keys") {
    testing::TempDir dir;
    const auto file = dir.path() / "itinera.conf";
    files::write_atomic(file, "# test\nserver.port = 9090\npaths.state = var/state\nplanner.travel_mode = drive\n");
    auto c = load_config(file, {{"ITINERA_SERVER_PORT", "9191"}, {"ITINERA_PLANNER_SIMILAR_BONUS", "0.5"}});
    CHECK(c.port == 9191);
    CHECK(c.similar_bonus == doctest::Approx(0.5));
    CHECK(c.travel_mode == "drive");
    CHECK(c.state_dir == (dir.path() / "var/state").lexically_normal());
    CHECK(c.host == "127.0.0.1");
    CHECK(c.resolved_index() == c.state_dir / "index.bin");

    files::write_atomic(file, "server.prot = 1\n");
    CHECK_THROWS_AS(load_config(file, {}), ValidationError);
    files::write_atomic(file, "server.port = eighty\n");
    CHECK_THROWS_AS(load_config(file, {}), ValidationError);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"ITINERA_CHAT_PROVIDER", "oracle"}}), ValidationError);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"ITINERA_PLANNER_DAY_END", "500"}}), ValidationError);
    CHECK(env_name("crawl.delay_ms") == "ITINERA_CRAWL_DELAY_MS");

    // every documented key round-trips through to_map
    const auto values = to_map(ApiConfig{});
    CHECK(values.size() == config_keys().size());
    ApiConfig copy;
    for (const auto& [k, v] : values) {
        set_value(copy, k, v);
    }
    CHECK(to_map(copy) == values);

    // the shipped example parses and points at the repository data
    const auto example = load_config(testing::data_dir().parent_path() / "itinera.conf.example", {});
    CHECK(std::filesystem::equivalent(example.data_dir, testing::data_dir()));
    CHECK(to_map(example).at("server.port") == "8080");

    auto p = testing::test_config(dir.path() / "fresh" / "state");
    prepare(p);
    CHECK(std::filesystem::is_directory(p.state_dir));
    p.catalog_path = dir.path() / "missing.jsonl";
    CHECK_THROWS_AS(prepare(p), ValidationError);
}

TEST_CASE("HTTP: session creation, health, errors") {
    testing::ServiceHarness h;
    testing::RunningServer server(*h.service);
    auto c = server.client();

    int status = 0;
    auto body = post(c, "/sessions", {{"language", "it"}}, &status);
    CHECK(status == 201);
    CHECK(body["first_prompt"]["question"].get<std::string>().find("Dove vuoi andare") != std::string::npos);
    CHECK(body["first_prompt"]["expected_slot"] == "destination");
    const auto first = body["session_id"].get<std::string>();
    const auto second = post(c, "/sessions", {{"language", "en"}})["session_id"].get<std::string>();
    CHECK(first != second);

    body = post(c, "/sessions", {{"language", "xx"}}, &status);
    CHECK(status == 400);
    CHECK(body["code"] == "invalid_request");
    CHECK(body.contains("message"));
    CHECK(body.contains("detail"));
    body = post(c, "/sessions", json::array({1, 2}), &status);
    CHECK(status == 400);
    const auto raw = c.Post("/sessions", "{not json", "application/json");
    CHECK(raw->status == 400);

    body = post(c, "/sessions/nobody/messages", {{"text", "ciao"}}, &status);
    CHECK(status == 404);
    CHECK(body["code"] == "not_found");
    CHECK(c.Get("/sessions/nobody/itinerary")->status == 404);
    CHECK(c.Get("/sessions/" + first + "/itinerary")->status == 404);
    CHECK(c.Get("/sessions/" + first + "/export")->status == 404);
    CHECK(c.Get("/no/such/route")->status == 404);

    const auto health = c.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);
    const auto hj = json::parse(health->body);
    CHECK(hj["status"] == "ok");
    CHECK(hj["components"]["index"]["status"] == "absent");
    CHECK(hj["components"]["index"]["chunks"] == 0);
    CHECK(hj["components"]["catalog"]["size"] == 48);
    CHECK(hj["components"]["chat"]["configured"] == true);
    CHECK(hj["components"]["sessions"]["count"] == 2);
    for (const auto* key : {"catalog", "index", "chat", "embedder", "sessions"}) {
        CHECK(hj["components"].contains(key));
    }
}

TEST_CASE("HTTP: a full conversation plans, exports and closes") {
    testing::ServiceHarness h;
    testing::RunningServer server(*h.service);
    auto c = server.client();
    const auto id = post(c, "/sessions", {{"language", "it"}})["session_id"].get<std::string>();
    const auto path = "/sessions/" + id + "/messages";

    json body;
    for (std::size_t i = 0; i + 1 < kItScript.size(); ++i) {
        body = post(c, path, {{"text", kItScript[i]}});
        CHECK(body["phase"] == "collecting");
        CHECK_FALSE(body.contains("itinerary"));
    }
    CHECK(body["prompt"]["expected_slot"] == "budget");
    body = post(c, path, {{"text", kItScript.back()}});
    CHECK(body["phase"] == "proposing");
    REQUIRE(body.contains("itinerary"));
    CHECK(body["itinerary"]["days"].size() == 3);

    const auto it_res = c.Get("/sessions/" + id + "/itinerary");
    REQUIRE(it_res->status == 200);
    const auto itinerary = json::parse(it_res->body).get<planner::Itinerary>();
    CHECK(json(itinerary) == body["itinerary"]);
    CHECK(planner::recompute_totals(itinerary) == itinerary.totals);
    CHECK(itinerary.visit_count() > 0);

    const auto md1 = c.Get("/sessions/" + id + "/export");
    const auto md2 = c.Get("/sessions/" + id + "/export");
    REQUIRE(md1->status == 200);
    CHECK(md1->body == md2->body);
    CHECK(md1->get_header_value("Content-Type").starts_with("text/markdown"));
    for (const auto& day : itinerary.days) {
        for (const auto& v : day.visits) {
            CHECK(md1->body.find(v.poi_name) != std::string::npos);
        }
    }
    const auto html = c.Get("/sessions/" + id + "/export?format=html");
    REQUIRE(html->status == 200);
    CHECK(html->body.starts_with("<!DOCTYPE html>"));
    CHECK(html->body.find("@media print") != std::string::npos);
    CHECK(c.Get("/sessions/" + id + "/export?format=pdf")->status == 400);

    int status = 0;
    CHECK(post(c, "/sessions/" + id + "/feedback", {{"target", "day:0"}, {"verdict", "rating"}, {"rating", 4}},
               &status)["status"] == "recorded");
    post(c, "/sessions/" + id + "/feedback", {{"target", "day:0"}, {"verdict", "rating"}, {"rating", 11}}, &status);
    CHECK(status == 400);

    const auto session = json::parse(c.Get("/sessions/" + id)->body);
    CHECK(session["transcript"].size() == 2 * kItScript.size());
    CHECK(session["phase"] == "proposing");

    body = post(c, path, {{"text", "scarica il programma"}});
    CHECK(body["phase"] == "closed");
    CHECK(body["reply"].get<std::string>().find("/sessions/" + id + "/export") != std::string::npos);
    CHECK_FALSE(body.contains("prompt"));
    body = post(c, path, {{"text", "ciao"}}, &status);
    CHECK(status == 409);
    CHECK(body["code"] == "session_closed");
    // export still served for the closed session, unchanged
    CHECK(c.Get("/sessions/" + id + "/export")->body == md1->body);
}

TEST_CASE("service transcript ends with the itinerary the modules produce directly") {
    testing::ServiceHarness h;
    auto& svc = *h.service;
    const auto id = svc.create_session("it").session_id;
    for (const auto& m : kItScript) {
        svc.post_message(id, m);
    }
    svc.post_message(id, "togli il museo dei misteri");
    const auto s = svc.state(id);
    REQUIRE(s.current_itinerary);
    REQUIRE_FALSE(s.drops.empty());

    // independent pipeline: catalog -> candidate ranking -> planner -> narration
    catalog::Catalog cat;
    testing::load_fixture_catalog(cat);
    const auto request = s.request();
    std::vector<std::tuple<int, double, catalog::Poi>> ranked;
    for (const auto& p : cat.all()) {
        if (text::fold(p.destination) == text::fold(request.destination) && !s.drops.contains(p.id)) {
            const auto sc = planner::score_poi(p, request);
            ranked.emplace_back(sc.eligible ? 0 : 1, -sc.score, p);
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<catalog::Poi> pois;
    for (auto& r : ranked) {
        pois.push_back(std::get<2>(r));
    }
    const auto matrix = catalog::build_matrix(pois, catalog::TravelMode::walk);
    const auto expected = planner::plan(request, pois, matrix).itinerary;
    CHECK(*s.current_itinerary == expected);
    CHECK(planner::validate(expected, request, pois, matrix).empty());

    llm::MockChatProvider mock;
    const auto persona = llm::load_persona(testing::data_dir() / "persona.json");
    CHECK(s.narration == llm::narrate_itinerary(expected, pois, persona, "it", mock).text);
}

TEST_CASE("export matches the pinned golden file") {
    testing::ServiceHarness h;
    auto& svc = *h.service;
    const auto id = svc.create_session("it").session_id;
    for (const auto& m : kItScript) {
        svc.post_message(id, m);
    }
    svc.post_message(id, "togli il museo dei misteri");
    const auto md = svc.export_markdown(id);
    if (std::getenv("ITINERA_UPDATE_GOLDEN") != nullptr) {
        std::filesystem::create_directories(golden_path().parent_path());
        files::write_atomic(golden_path(), md);
    }
    REQUIRE(std::filesystem::exists(golden_path()));
    CHECK(md == files::read_all(golden_path()));
    CHECK(svc.export_markdown(id) == md);
}

TEST_CASE("markdown export escapes table cells and needs an itinerary") {
    const auto resources = dialogue::load_dialogue_resources(testing::data_dir());
    dialogue::SessionState s;
    s.session_id = "x";
    s.language = "en";
    CHECK_THROWS_AS(render_markdown(s, resources.text("en")), NotFoundError);
    planner::Itinerary it;
    planner::DaySchedule day;
    day.date = *make_date(2025, 6, 10);
    day.visits.push_back({"p1", "Bar | Pipe", 600, 660, 12.5, 1.0});
    it.days.push_back(day);
    it.days.push_back({*make_date(2025, 6, 11), {}, {}, 540, 1140});
    it.totals = planner::recompute_totals(it);
    s.current_itinerary = it;
    const auto md = render_markdown(s, resources.text("en"));
    CHECK(md.find("| 10:00-11:00 | Bar \\| Pipe | 12.50 EUR |") != std::string::npos);
    CHECK(md.find("Free day.") != std::string::npos);
    CHECK(md.find("Auntie says") == std::string::npos);  // no narration yet
    s.narration = "A <b>lovely</b> day.";
    CHECK(render_html(s, resources.text("en")).find("A &lt;b&gt;lovely&lt;/b&gt; day.") != std::string::npos);
}

TEST_CASE("concurrent sessions never cross-contaminate") {
    struct Script {
        std::string language;
        std::vector<std::string> messages;
    };
    std::vector<Script> scripts;
    for (int i = 0; i < 6; ++i) {
        auto msgs = i % 2 == 0 ? kItScript : kEnScript;
        msgs.push_back(i % 2 == 0 ? "togli il museo dei misteri" : "what time does it open?");
        if (i % 3 == 0) {
            msgs.push_back(i % 2 == 0 ? "scarica" : "download");
        }
        scripts.push_back({i % 2 == 0 ? "it" : "en", msgs});
    }

    // sequential reference, one fresh service per script
    std::vector<dialogue::SessionState> expected;
    for (const auto& sc : scripts) {
        testing::ServiceHarness h;
        const auto id = h.service->create_session(sc.language).session_id;
        for (const auto& m : sc.messages) {
            h.service->post_message(id, m);
        }
        expected.push_back(timeless(h.service->state(id)));
    }

    testing::ServiceHarness h;
    testing::RunningServer server(*h.service);
    std::vector<std::string> ids(scripts.size());
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < scripts.size(); ++i) {
        threads.emplace_back([&, i] {
            auto c = server.client();
            auto res = c.Post("/sessions", json{{"language", scripts[i].language}}.dump(), "application/json");
            ids[i] = json::parse(res->body)["session_id"].get<std::string>();
            for (const auto& m : scripts[i].messages) {
                c.Post(("/sessions/" + ids[i] + "/messages").c_str(), json{{"text", m}}.dump(), "application/json");
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (std::size_t i = 0; i < scripts.size(); ++i) {
        const auto got = h.service->state(ids[i]);
        CHECK(got.transcript.size() == 2 * scripts[i].messages.size());
        // the reference date is read from a clock shared by all sessions; same day either way
        CHECK(timeless(got) == expected[i]);
    }
}

TEST_CASE("messages to one session are serialized") {
    testing::ServiceHarness h;
    testing::RunningServer server(*h.service);
    auto c0 = server.client();
    const auto id = post(c0, "/sessions", {{"language", "it"}})["session_id"].get<std::string>();
    std::vector<std::thread> threads;
    for (int i = 0; i < 12; ++i) {
        threads.emplace_back([&, i] {
            auto c = server.client();
            c.Post(("/sessions/" + id + "/messages").c_str(), json{{"text", "boh " + std::to_string(i)}}.dump(),
                   "application/json");
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    const auto s = h.service->state(id);
    REQUIRE(s.transcript.size() == 24);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.transcript.size(); i += 2) {
        CHECK(s.transcript[i].role == "user");
        CHECK(s.transcript[i + 1].role == "assistant");
        CHECK(s.transcript[i].ts < s.transcript[i + 1].ts);
        seen.insert(s.transcript[i].text);
    }
    CHECK(seen.size() == 12);
}

TEST_CASE("restart replays every session from the event log") {
    testing::ServiceHarness h;
    h.config.snapshot_every = 5;
    h.start();
    auto& a = *h.service;
    const auto planned = a.create_session("it").session_id;
    for (const auto& m : kItScript) {
        a.post_message(planned, m);
    }
    a.post_message(planned, "teniamo il castello");
    const auto collecting = a.create_session("en").session_id;
    a.post_message(collecting, "Termoli");
    const auto closed = a.create_session("en").session_id;
    for (const auto& m : kEnScript) {
        a.post_message(closed, m);
    }
    a.post_message(closed, "perfect");
    a.post_message(closed, "download");

    std::map<std::string, dialogue::SessionState> before;
    for (const auto& id : a.session_ids()) {
        before[id] = a.state(id);
    }
    const auto export_before = a.export_markdown(planned);

    h.start();
    auto& b = *h.service;
    CHECK(b.session_ids().size() == before.size());
    for (const auto& [id, s] : before) {
        CHECK(b.state(id) == s);
    }
    CHECK(b.export_markdown(planned) == export_before);
    CHECK_THROWS_AS(b.post_message(closed, "hello"), TerminalStateError);
    CHECK(b.post_message(collecting, "from June 3 to June 5").phase == Phase::collecting);
    // a closed session restored from disk feeds the similar-profile bonus
    auto req = b.state(closed).request();
    CHECK_FALSE(b.similar_tags(req).empty());
}

TEST_CASE("similar closed profiles contribute the tags of places they liked") {
    testing::ServiceHarness h;
    auto& svc = *h.service;
    const auto a = svc.create_session("en").session_id;
    for (const auto& m : kEnScript) {
        svc.post_message(a, m);
    }
    const auto request = svc.state(a).request();
    CHECK(svc.similar_tags(request).empty());  // not closed yet
    svc.post_message(a, "perfect");
    svc.post_message(a, "download");

    std::set<std::string> liked;
    for (const auto& f : svc.state(a).feedback) {
        if (f.verdict == dialogue::Verdict::accept) {
            const auto tags = svc.catalog().get(f.target)->category_tags;
            liked.insert(tags.begin(), tags.end());
        }
    }
    REQUIRE_FALSE(liked.empty());
    CHECK(svc.similar_tags(request) == liked);

    planner::TripRequest unrelated = request;
    unrelated.preference_weights = {{"zzz-none", 1.0}};
    CHECK(svc.similar_tags(unrelated).empty());
}

TEST_CASE("questions are answered from the index, or politely declined") {
    testing::ServiceHarness h;
    std::vector<ingest::Chunk> chunks;
    for (const auto& doc : ingest::ingest_directory(testing::fixture("docs")).documents) {
        const auto c = ingest::chunk(doc);
        chunks.insert(chunks.end(), c.begin(), c.end());
    }
    retrieval::MockEmbedder embedder;
    retrieval::VectorIndex index(embedder.dim());
    REQUIRE(retrieval::index_chunks(index, embedder, chunks) > 0);
    index.save(h.config.resolved_index());
    h.start();
    CHECK(h.service->health()["components"]["index"]["status"] == "loaded");

    auto& svc = *h.service;
    const auto id = svc.create_session("it").session_id;
    for (const auto& m : kItScript) {
        svc.post_message(id, m);
    }
    const auto r = svc.post_message(id, "a che ora apre il castello?");
    CHECK(r.reply.find("Ecco cosa so") != std::string::npos);
    CHECK(r.phase == Phase::proposing);

    h.start(llm::MockOptions{.fail = true});
    const auto down = h.service->post_message(id, "a che ora apre il castello?");
    CHECK(down.reply.find("Adesso non riesco a rispondere") != std::string::npos);
}

TEST_CASE("locks that no longer fit are released with a notice") {
    testing::ServiceHarness h;
    auto& svc = *h.service;
    const auto id = svc.create_session("it").session_id;
    for (const auto& m : kItScript) {
        svc.post_message(id, m);
    }
    const auto first = svc.state(id).current_itinerary->days.back().visits.front().poi_name;
    svc.post_message(id, "teniamo " + first);
    REQUIRE_FALSE(svc.state(id).locks.empty());
    const auto r = svc.post_message(id, "facciamo dal 2025-06-10 al 2025-06-11");
    const auto s = svc.state(id);
    CHECK(s.current_itinerary->days.size() == 2);
    CHECK(s.locks.empty());
    CHECK(r.reply.find("ho rifatto il programma da capo") != std::string::npos);
}
