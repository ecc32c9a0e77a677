#include "itinera/planner/instances.hpp"

#include "itinera/common/files.hpp"

#include <fmt/format.h>
#include <random>

namespace itinera::planner {

namespace {

const std::vector<std::string> kTags = {"museum", "history", "art", "nature", "food", "church",
                                        "shopping", "family", "wine", "culture", "sightseeing"};

catalog::OpeningHours random_hours(std::mt19937_64& rng, bool restaurant) {
    std::uniform_int_distribution<int> pattern(0, 4);
    catalog::OpeningHours h;
    if (restaurant) {
        const int lunch_open = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 720 : 750;
        for (int d = 0; d < 7; ++d) {
            h.days[d] = {{lunch_open, 900}, {1170, 1380}};
        }
        h.days[std::uniform_int_distribution<int>(0, 6)(rng)].clear();
        return h;
    }
    switch (pattern(rng)) {
        case 0: return catalog::OpeningHours::every_day(540, 1140);
        case 1: return catalog::OpeningHours::every_day(0, 1440);
        case 2:
            for (int d = 0; d < 7; ++d) {
                h.days[d] = {{540, 780}, {900, 1140}};
            }
            return h;
        case 3:
            h = catalog::OpeningHours::every_day(600, 1080);
            h.days[0].clear();
            return h;
        default:
            for (int d = 0; d < 7; ++d) {
                if (std::uniform_int_distribution<int>(0, 3)(rng) > 0) {
                    h.days[d] = {{std::uniform_int_distribution<int>(32, 44)(rng) * 15,
                                  std::uniform_int_distribution<int>(60, 80)(rng) * 15}};
                }
            }
            return h;
    }
}

}  // namespace

PlanInstance random_instance(std::uint64_t seed, const InstanceShape& shape) {
    std::mt19937_64 rng(seed);
    const auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

    PlanInstance inst;
    const bool drive = chance(0.3);
    const double spread = drive ? 0.15 : 0.025;
    const int n = uniform(shape.min_pois, shape.max_pois);
    for (int i = 0; i < n; ++i) {
        catalog::Poi p;
        p.id = fmt::format("p{:02}", i);
        p.name = fmt::format("Luogo {}", i);
        p.destination = "Campobasso";
        const bool restaurant = chance(0.2);
        if (restaurant) {
            p.category_tags = {"restaurant", "food"};
            if (chance(0.5)) {
                p.category_tags.insert("vegetarian");
            }
            p.visit_duration = uniform(4, 6) * 15;
        } else {
            for (int t = uniform(1, 3); t > 0; --t) {
                p.category_tags.insert(kTags[static_cast<std::size_t>(uniform(0, static_cast<int>(kTags.size()) - 1))]);
            }
            p.visit_duration = uniform(2, 12) * 15;
        }
        p.position = {41.56 + std::uniform_real_distribution<double>(-spread, spread)(rng),
                      14.66 + std::uniform_real_distribution<double>(-spread, spread)(rng)};
        p.hours = random_hours(rng, restaurant);
        p.cost_per_person = chance(0.3) ? 0.0 : uniform(2, 60) * 0.5;
        p.description = "Synthetic point of interest.";
        inst.pois.push_back(std::move(p));
    }

    auto& r = inst.request;
    r.destination = "Campobasso";
    r.start_date = *make_date(2025, uniform(1, 12), uniform(1, 28));
    r.end_date = r.start_date + std::chrono::days(uniform(shape.min_days, shape.max_days) - 1);
    r.adults = uniform(1, 4);
    r.children = chance(0.3) ? uniform(1, 3) : 0;
    for (const auto& tag : kTags) {
        if (chance(0.6)) {
            r.preference_weights[tag] = uniform(0, 4) * 0.25;
        }
    }
    if (chance(0.5)) {
        r.preference_weights["restaurant"] = uniform(1, 4) * 0.25;
    }
    r.budget_total = chance(0.1) ? 0.0 : uniform(0, 80) * 5.0;
    if (chance(0.2)) {
        r.restrictions.insert("vegetarian");
    }
    r.pace = static_cast<Pace>(uniform(0, 2));
    inst.matrix = catalog::build_matrix(inst.pois, drive ? catalog::TravelMode::drive : catalog::TravelMode::walk);
    return inst;
}

PlanInstance instance_from_json(const nlohmann::json& j) {
    PlanInstance inst;
    j.at("request").get_to(inst.request);
    validate(inst.request);
    for (const auto& pj : j.at("pois")) {
        auto p = pj.get<catalog::Poi>();
        catalog::validate(p);
        inst.pois.push_back(std::move(p));
    }
    if (j.contains("matrix")) {
        j.at("matrix").get_to(inst.matrix);
    } else {
        inst.matrix = catalog::build_matrix(inst.pois, catalog::travel_mode_from_string(j.value("mode", "walk")));
    }
    return inst;
}

nlohmann::json instance_to_json(const PlanInstance& instance) {
    return nlohmann::json{{"request", instance.request}, {"pois", instance.pois}, {"matrix", instance.matrix}};
}

PlanInstance load_instance(const std::filesystem::path& path) {
    return instance_from_json(nlohmann::json::parse(files::read_all(path)));
}

}  // namespace itinera::planner
