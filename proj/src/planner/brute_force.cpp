#include "itinera/planner/planner.hpp"

#include "itinera/common/errors.hpp"

#include <algorithm>
#include <map>

namespace itinera::planner {

namespace {

struct Item {
    const catalog::Poi* poi;
    double score;
    double cost;
    bool restaurant;
    int lock_day = -1;
};

struct Search {
    const TripRequest& request;
    const catalog::TravelMatrix& matrix;
    const PlannerOptions& opt;
    std::vector<Item> items;
    std::vector<int> weekdays;
    std::vector<std::vector<int>> lock_order;
    int cap = 0;

    std::vector<std::vector<int>> days;
    std::vector<bool> used;
    double score = 0.0;
    double cost = 0.0;
    int travel = 0;

    bool have_best = false;
    std::vector<std::vector<int>> best_days;
    double best_score = 0.0;
    int best_travel = 0;

    /// Arrival for a visit that may start at `ready`, or -1.
    int arrive(const Item& it, int weekday, int ready) const {
        int from = ready;
        if (it.restaurant && from < opt.meal_start) {
            from = opt.meal_start;
        }
        for (const auto& iv : it.poi->hours.on(weekday)) {
            const int a = std::max(from, iv.open);
            const int leave = a + it.poi->visit_duration;
            if (leave > iv.close || leave > opt.day_end) {
                continue;
            }
            if (it.restaurant && a > opt.meal_end) {
                continue;
            }
            return a;
        }
        return -1;
    }

    void record() {
        const bool improves = !have_best || score > best_score + 1e-9 ||
                              (score >= best_score - 1e-9 && travel < best_travel);
        if (improves) {
            have_best = true;
            best_days = days;
            best_score = score;
            best_travel = travel;
        }
    }

    // Extends day d whose last visit ends at `clock` (-1 when the day is still empty).
    void extend(int d, int clock, int restaurants, std::size_t locks_done) {
        const int n_days = static_cast<int>(weekdays.size());
        // Option 1: close this day.
        if (locks_done == lock_order[d].size()) {
            if (d + 1 == n_days) {
                record();
            } else {
                extend(d + 1, -1, 0, 0);
            }
        }
        if (static_cast<int>(days[d].size()) >= cap) {
            return;
        }
        // Option 2: append one more visit.
        for (std::size_t i = 0; i < items.size(); ++i) {
            const Item& it = items[i];
            if (used[i] || (it.restaurant && restaurants > 0)) {
                continue;
            }
            if (it.lock_day >= 0) {
                if (it.lock_day != d || locks_done >= lock_order[d].size() ||
                    lock_order[d][locks_done] != static_cast<int>(i)) {
                    continue;
                }
            }
            if (cost + it.cost > request.budget_total + 1e-9) {
                continue;
            }
            int leg = 0;
            int ready = opt.day_start;
            if (clock >= 0) {
                leg = matrix.between(items[days[d].back()].poi->id, it.poi->id);
                ready = clock + leg;
            }
            const int a = arrive(it, weekdays[d], ready);
            if (a < 0) {
                continue;
            }
            used[i] = true;
            days[d].push_back(static_cast<int>(i));
            score += it.score;
            cost += it.cost;
            travel += leg;
            extend(d, a + it.poi->visit_duration, restaurants + (it.restaurant ? 1 : 0),
                   locks_done + (it.lock_day >= 0 ? 1 : 0));
            travel -= leg;
            cost -= it.cost;
            score -= it.score;
            days[d].pop_back();
            used[i] = false;
        }
    }
};

}  // namespace

Itinerary brute_force_plan(const TripRequest& request, const std::vector<catalog::Poi>& candidates,
                           const catalog::TravelMatrix& matrix, const PlannerOptions& options,
                           const Itinerary* current, const std::set<std::string>& locks) {
    if (candidates.size() > kBruteForceLimit) {
        throw ValidationError("candidates", "brute force is limited to 8 candidates");
    }
    validate(request);
    Search s{request, matrix, options, {}, {}, {}, options.visit_cap(request.pace), {}, {}, 0.0, 0.0, 0, false, {}, 0.0, 0};
    const int n_days = request.day_count();
    for (int d = 0; d < n_days; ++d) {
        s.weekdays.push_back(weekday_index(request.date_of(d)));
    }
    s.lock_order.assign(static_cast<std::size_t>(n_days), {});
    s.days.assign(static_cast<std::size_t>(n_days), {});

    std::map<std::string, int> index;
    for (const auto& poi : candidates) {
        const auto sc = score_poi(poi, request, options);
        const bool is_locked = locks.contains(poi.id);
        // Only scoring, eligible POIs are worth a visit; locked ones are kept regardless.
        if (!is_locked && (!sc.eligible || sc.score <= 1e-9)) {
            continue;
        }
        index[poi.id] = static_cast<int>(s.items.size());
        s.items.push_back(Item{&poi, sc.score, poi.cost_per_person * request.party_size(),
                               poi.has_tag(catalog::kRestaurantTag)});
    }
    if (current) {
        for (const auto& day : current->days) {
            const int d = static_cast<int>((day.date - request.start_date).count());
            for (const auto& v : day.visits) {
                if (!locks.contains(v.poi_id) || !index.contains(v.poi_id) || d < 0 || d >= n_days) {
                    continue;
                }
                const int i = index[v.poi_id];
                s.items[i].lock_day = d;
                s.lock_order[d].push_back(i);
            }
        }
    }
    s.used.assign(s.items.size(), false);
    s.extend(0, -1, 0, 0);

    Itinerary out = empty_itinerary(request, options);
    if (!s.have_best) {
        return out;
    }
    for (int d = 0; d < n_days; ++d) {
        int clock = -1;
        auto& day = out.days[d];
        for (const int i : s.best_days[d]) {
            const Item& it = s.items[i];
            int leg = 0;
            int ready = options.day_start;
            if (clock >= 0) {
                leg = matrix.between(day.visits.back().poi_id, it.poi->id);
                ready = clock + leg;
                day.legs.push_back(TravelLeg{day.visits.back().poi_id, it.poi->id, leg});
            }
            const int a = s.arrive(it, s.weekdays[d], ready);
            clock = a + it.poi->visit_duration;
            day.visits.push_back(Visit{it.poi->id, it.poi->name, a, clock, it.cost, it.score});
        }
    }
    out.totals = recompute_totals(out);
    return out;
}

}  // namespace itinera::planner
