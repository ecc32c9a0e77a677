#include "itinera/catalog/travel_matrix.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/planner/instances.hpp"
#include "itinera/planner/planner.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <fmt/format.h>
#include <random>

using namespace itinera;
using namespace itinera::planner;
using catalog::Poi;

namespace {

Poi make_poi(const std::string& id, std::set<std::string> tags, double lat, double lon, int duration, double cost,
             catalog::OpeningHours hours = catalog::OpeningHours::every_day(540, 1140)) {
    Poi p;
    p.id = id;
    p.name = "Name " + id;
    p.destination = "Campobasso";
    p.category_tags = std::move(tags);
    p.position = {lat, lon};
    p.visit_duration = duration;
    p.cost_per_person = cost;
    p.hours = std::move(hours);
    return p;
}

TripRequest make_request(int days, double budget, std::map<std::string, double> weights) {
    TripRequest r;
    r.destination = "Campobasso";
    r.start_date = *make_date(2025, 5, 12);  // a Monday
    r.end_date = r.start_date + std::chrono::days(days - 1);
    r.budget_total = budget;
    r.preference_weights = std::move(weights);
    return r;
}

std::string describe(const std::vector<Violation>& vs) {
    std::string s;
    for (const auto& v : vs) {
        s += v.rule + " @ " + v.element + ": " + v.message + "\n";
    }
    return s;
}

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.rule == rule; });
}

std::set<std::string> poi_set(const Itinerary& it) {
    std::set<std::string> ids;
    for (const auto& d : it.days) {
        for (const auto& v : d.visits) {
            ids.insert(v.poi_id);
        }
    }
    return ids;
}

}  // namespace

TEST_CASE("score_poi sums tag weights and applies restrictions") {
    auto r = make_request(1, 100, {{"nature", 1.0}, {"food", 1.0}});
    CHECK(score_poi(make_poi("a", {"museum"}, 41.5, 14.6, 60, 0), r).score == 0.0);
    CHECK(score_poi(make_poi("b", {"nature", "food"}, 41.5, 14.6, 60, 0), r).score == doctest::Approx(2.0));

    r.restrictions = {"vegetarian"};
    const auto meat = score_poi(make_poi("c", {"restaurant", "food"}, 41.5, 14.6, 60, 20), r);
    CHECK_FALSE(meat.eligible);
    CHECK(meat.score == 0.0);
    CHECK(score_poi(make_poi("d", {"restaurant", "food", "vegetarian"}, 41.5, 14.6, 60, 20), r).eligible);
    CHECK(score_poi(make_poi("e", {"nature"}, 41.5, 14.6, 60, 0), r).eligible);

    r.restrictions = {"allergy:gluten"};
    CHECK_FALSE(score_poi(make_poi("f", {"restaurant"}, 41.5, 14.6, 60, 20), r).eligible);
    CHECK(score_poi(make_poi("g", {"restaurant", "gluten-free"}, 41.5, 14.6, 60, 20), r).eligible);

    PlannerOptions opt;
    opt.bonus_tags = {"nature"};
    opt.similar_bonus = 0.1;
    r.restrictions.clear();
    CHECK(score_poi(make_poi("h", {"nature", "food"}, 41.5, 14.6, 60, 0), r, opt).score == doctest::Approx(2.1));
}

TEST_CASE("empty and unaffordable inputs give empty plans") {
    const auto r = make_request(2, 100, {{"museum", 1.0}});
    const auto res = plan(r, {}, catalog::TravelMatrix{});
    CHECK(res.itinerary.days.size() == 2);
    CHECK(res.itinerary.visit_count() == 0);
    CHECK(res.itinerary.totals.score == 0.0);

    std::vector<Poi> pois = {make_poi("a", {"museum"}, 41.56, 14.66, 60, 5),
                             make_poi("b", {"museum"}, 41.561, 14.661, 60, 8)};
    const auto m = catalog::build_matrix(pois, catalog::TravelMode::walk);
    const auto broke = plan(make_request(1, 0, {{"museum", 1.0}}), pois, m);
    CHECK(broke.itinerary.visit_count() == 0);
    CHECK(broke.diagnostics.rejections == std::map<std::string, int>{{"budget", 2}});
}

TEST_CASE("plans respect hours, travel and the meal window") {
    catalog::OpeningHours afternoon;
    for (auto& d : afternoon.days) {
        d = {{900, 1080}};
    }
    catalog::OpeningHours lunch = catalog::OpeningHours::every_day(720, 900);
    std::vector<Poi> pois = {
        make_poi("castle", {"history"}, 41.5610, 14.6590, 90, 5),
        make_poi("museum", {"museum", "history"}, 41.5600, 14.6680, 120, 4, afternoon),
        make_poi("osteria", {"restaurant", "food"}, 41.5590, 14.6620, 75, 25, lunch),
        make_poi("park", {"nature"}, 41.5650, 14.6500, 60, 0),
    };
    const auto m = catalog::build_matrix(pois, catalog::TravelMode::walk);
    const auto r = make_request(1, 200, {{"history", 1.0}, {"museum", 0.5}, {"food", 1.0}, {"nature", 0.5}});
    const auto res = plan(r, pois, m);
    CHECK(validate(res.itinerary, r, pois, m).empty());
    CHECK(res.itinerary.visit_count() == 4);
    for (const auto& v : res.itinerary.days[0].visits) {
        if (v.poi_id == "osteria") {
            CHECK(v.arrival >= 750);
            CHECK(v.arrival <= 870);
        }
        if (v.poi_id == "museum") {
            CHECK(v.arrival >= 900);
        }
    }
}

TEST_CASE("validate catches injected faults") {
    std::vector<Poi> pois = {make_poi("a", {"museum"}, 41.56, 14.66, 60, 5, catalog::OpeningHours::every_day(600, 1100)),
                             make_poi("b", {"museum"}, 41.57, 14.67, 60, 5)};
    const auto m = catalog::build_matrix(pois, catalog::TravelMode::walk);
    const auto r = make_request(2, 500, {{"museum", 1.0}});
    Itinerary it = empty_itinerary(r);
    it.days[0].visits.push_back(Visit{"a", "Name a", 600, 660, 5, 1.0});
    it.totals = recompute_totals(it);
    REQUIRE(describe(validate(it, r, pois, m)) == "");

    SUBCASE("shift before opening") {
        auto bad = it;
        bad.days[0].visits[0].arrival -= 30;
        bad.days[0].visits[0].departure -= 30;
        const auto vs = validate(bad, r, pois, m);
        REQUIRE(vs.size() == 1);
        CHECK(vs[0].rule == "opening-hours");
        CHECK(vs[0].element == "2025-05-12/a");
    }
    SUBCASE("duplicate across days") {
        auto bad = it;
        bad.days[1].visits.push_back(bad.days[0].visits[0]);
        bad.totals = recompute_totals(bad);
        const auto vs = validate(bad, r, pois, m);
        REQUIRE(vs.size() == 1);
        CHECK(vs[0].rule == "uniqueness");
    }
    SUBCASE("budget, totals and travel") {
        auto bad = it;
        bad.days[0].visits.push_back(Visit{"b", "Name b", 661, 721, 5, 1.0});
        bad.days[0].legs.push_back(TravelLeg{"a", "b", m.between("a", "b")});
        CHECK(has_rule(validate(bad, r, pois, m), "travel"));
        CHECK(has_rule(validate(bad, r, pois, m), "totals"));
        auto poor = r;
        poor.budget_total = 1;
        CHECK(has_rule(validate(it, poor, pois, m), "budget"));
    }
}

TEST_CASE("brute force handles forced choices") {
    std::vector<Poi> one = {make_poi("only", {"museum"}, 41.56, 14.66, 60, 0)};
    const auto m1 = catalog::build_matrix(one, catalog::TravelMode::walk);
    const auto r = make_request(1, 0, {{"museum", 1.0}, {"nature", 0.5}});
    const auto bf = brute_force_plan(r, one, m1);
    CHECK(poi_set(bf) == std::set<std::string>{"only"});

    // Both need most of the day, only one fits; the better one wins.
    std::vector<Poi> two = {make_poi("long-a", {"nature"}, 41.56, 14.66, 400, 0),
                            make_poi("long-b", {"museum"}, 41.57, 14.67, 400, 0)};
    const auto m2 = catalog::build_matrix(two, catalog::TravelMode::walk);
    const auto bf2 = brute_force_plan(r, two, m2);
    CHECK(poi_set(bf2) == std::set<std::string>{"long-b"});
    CHECK(validate(bf2, r, two, m2).empty());
    CHECK(poi_set(plan(r, two, m2).itinerary) == std::set<std::string>{"long-b"});

    std::vector<Poi> nine;
    for (int i = 0; i < 9; ++i) {
        nine.push_back(make_poi(fmt::format("x{}", i), {"museum"}, 41.56, 14.66 + i * 0.001, 30, 0));
    }
    CHECK_THROWS_AS(brute_force_plan(r, nine, catalog::build_matrix(nine, catalog::TravelMode::walk)), ValidationError);
}

TEST_CASE("random instances: plans are always feasible, deterministic and consistent") {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const auto inst = random_instance(seed);
        const auto res = plan(inst.request, inst.pois, inst.matrix);
        const auto vs = validate(res.itinerary, inst.request, inst.pois, inst.matrix);
        INFO("seed " << seed << "\n" << describe(vs));
        REQUIRE(vs.empty());
        if (seed % 50 == 0) {
            CHECK(plan(inst.request, inst.pois, inst.matrix).itinerary == res.itinerary);
            const auto json = nlohmann::json(res.itinerary);
            CHECK(json.get<Itinerary>() == res.itinerary);
        }
    }
}

TEST_CASE("random small instances: within 0.9 of the brute-force optimum") {
    double gap_sum = 0.0;
    int worse = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto inst = random_instance(10'000 + seed, InstanceShape{2, 6, 1, 2});
        const auto heuristic = plan(inst.request, inst.pois, inst.matrix).itinerary;
        const auto optimum = brute_force_plan(inst.request, inst.pois, inst.matrix);
        INFO("seed " << 10'000 + seed);
        REQUIRE(validate(optimum, inst.request, inst.pois, inst.matrix).empty());
        CHECK(heuristic.totals.score >= 0.9 * optimum.totals.score - 1e-9);
        CHECK(heuristic.totals.score <= optimum.totals.score + 1e-9);
        if (optimum.totals.score > 0) {
            gap_sum += 1.0 - heuristic.totals.score / optimum.totals.score;
            worse += heuristic.totals.score < optimum.totals.score - 1e-9 ? 1 : 0;
        }
    }
    MESSAGE(fmt::format("mean gap {:.4f}, suboptimal on {} of 100", gap_sum / 100.0, worse));
}

TEST_CASE("replan honours locks and drops") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const auto inst = random_instance(20'000 + seed, InstanceShape{4, 14, 1, 3});
        const auto first = plan(inst.request, inst.pois, inst.matrix).itinerary;
        const auto ids = poi_set(first);
        if (ids.empty()) {
            continue;
        }
        INFO("seed " << 20'000 + seed);
        const auto full = replan(inst.request, first, ids, {}, inst.pois, inst.matrix).itinerary;
        CHECK(poi_set(full) == ids);
        CHECK(validate(full, inst.request, inst.pois, inst.matrix).empty());

        const auto dropped = *ids.begin();
        const auto without = replan(inst.request, first, {}, {dropped}, inst.pois, inst.matrix).itinerary;
        CHECK_FALSE(without.contains(dropped));
        CHECK(validate(without, inst.request, inst.pois, inst.matrix).empty());

        CHECK_THROWS_AS(replan(inst.request, first, {dropped}, {dropped}, inst.pois, inst.matrix), ValidationError);

        // Locks keep day and relative order.
        std::set<std::string> locks;
        std::mt19937_64 rng(seed);
        for (const auto& id : ids) {
            if (rng() % 2 == 0) {
                locks.insert(id);
            }
        }
        const auto locked = replan(inst.request, first, locks, {}, inst.pois, inst.matrix).itinerary;
        CHECK(validate(locked, inst.request, inst.pois, inst.matrix).empty());
        for (std::size_t d = 0; d < first.days.size(); ++d) {
            std::vector<std::string> before;
            std::vector<std::string> after;
            for (const auto& v : first.days[d].visits) {
                if (locks.contains(v.poi_id)) {
                    before.push_back(v.poi_id);
                }
            }
            for (const auto& v : locked.days[d].visits) {
                if (locks.contains(v.poi_id)) {
                    after.push_back(v.poi_id);
                }
            }
            CHECK(before == after);
        }
    }
}

TEST_CASE("replan with random locks stays within 0.9 of the locked optimum") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 200 && checked < 60; ++seed) {
        const auto inst = random_instance(30'000 + seed, InstanceShape{3, 7, 1, 2});
        const auto first = plan(inst.request, inst.pois, inst.matrix).itinerary;
        std::set<std::string> locks;
        std::mt19937_64 rng(seed);
        for (const auto& id : poi_set(first)) {
            if (rng() % 2 == 0) {
                locks.insert(id);
            }
        }
        // Drop one unlocked candidate to make the replan differ from the first plan.
        std::set<std::string> drops;
        for (const auto& p : inst.pois) {
            if (!locks.contains(p.id) && first.contains(p.id)) {
                drops.insert(p.id);
                break;
            }
        }
        std::vector<Poi> remaining;
        for (const auto& p : inst.pois) {
            if (!drops.contains(p.id)) {
                remaining.push_back(p);
            }
        }
        const auto heuristic = replan(inst.request, first, locks, drops, inst.pois, inst.matrix).itinerary;
        const auto optimum = brute_force_plan(inst.request, remaining, inst.matrix, {}, &first, locks);
        INFO("seed " << 30'000 + seed);
        CHECK(validate(heuristic, inst.request, inst.pois, inst.matrix).empty());
        CHECK(heuristic.totals.score >= 0.9 * optimum.totals.score - 1e-9);
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("larger budgets lower the score on under 1% of sampled increases") {
    int violations = 0;
    int steps = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto inst = random_instance(40'000 + seed, InstanceShape{5, 25, 1, 3});
        inst.request.budget_total = 20;
        double previous = -1.0;
        for (int step = 0; step < 6; ++step) {
            const double s = plan(inst.request, inst.pois, inst.matrix).itinerary.totals.score;
            if (step > 0) {
                ++steps;
                violations += s < previous - 1e-9 ? 1 : 0;
            }
            previous = s;
            inst.request.budget_total += 40;
        }
    }
    MESSAGE(fmt::format("{} of {} budget increases lowered the score", violations, steps));
    CHECK(violations * 100 < steps);
}
