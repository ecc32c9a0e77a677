#include "itinera/planner/planner.hpp"

#include "itinera/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <optional>
#include <random>

namespace itinera::planner {

namespace {

constexpr double kEps = 1e-9;

struct Cand {
    const catalog::Poi* poi = nullptr;
    std::size_t mi = 0;  // matrix index
    double score = 0.0;
    double cost = 0.0;   // for the whole party
    bool eligible = true;
    bool restaurant = false;
    std::string ineligible_reason;

    bool insertable() const { return eligible && score > kEps; }
};

struct Problem {
    const TripRequest* req = nullptr;
    const PlannerOptions* opt = nullptr;
    const catalog::TravelMatrix* matrix = nullptr;
    std::vector<Cand> cands;  // ordered by poi id
    std::vector<int> weekday;
    int days = 0;
    int cap = 0;
    double budget = 0.0;
    bool food_first = false;
    std::vector<int> lock_day;                 // per candidate, -1 when free
    std::vector<std::vector<int>> lock_order;  // per day

    int travel(int a, int b) const { return matrix->at(cands[a].mi, cands[b].mi); }
    bool locked(int c) const { return lock_day[c] >= 0; }
};

/// Earliest arrival >= t inside an opening interval of the weekday, or -1.
int earliest_arrival(const Problem& p, int c, int weekday, int t) {
    const auto& cand = p.cands[c];
    const int dur = cand.poi->visit_duration;
    int lo = std::max(t, p.opt->day_start);
    if (cand.restaurant) {
        lo = std::max(lo, p.opt->meal_start);
    }
    for (const auto& iv : cand.poi->hours.on(weekday)) {
        const int a = std::max(lo, iv.open);
        if (a + dur <= iv.close && a + dur <= p.opt->day_end && (!cand.restaurant || a <= p.opt->meal_end)) {
            return a;
        }
    }
    return -1;
}

/// Travel minutes of a feasible day sequence, nullopt when infeasible.
std::optional<int> day_travel(const Problem& p, int day, const std::vector<int>& seq,
                              std::vector<std::pair<int, int>>* times = nullptr) {
    if (static_cast<int>(seq.size()) > p.cap) {
        return std::nullopt;
    }
    int restaurants = 0;
    std::size_t next_lock = 0;
    const auto& order = p.lock_order[day];
    int t = p.opt->day_start;
    int travel = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const int c = seq[i];
        if (p.cands[c].restaurant && ++restaurants > 1) {
            return std::nullopt;
        }
        if (p.locked(c)) {
            if (p.lock_day[c] != day || next_lock >= order.size() || order[next_lock] != c) {
                return std::nullopt;
            }
            ++next_lock;
        }
        if (i > 0) {
            const int leg = p.travel(seq[i - 1], c);
            travel += leg;
            t += leg;
        }
        const int a = earliest_arrival(p, c, p.weekday[day], t);
        if (a < 0) {
            return std::nullopt;
        }
        t = a + p.cands[c].poi->visit_duration;
        if (times) {
            times->emplace_back(a, t);
        }
    }
    if (next_lock != order.size()) {
        return std::nullopt;
    }
    return travel;
}

struct Sol {
    std::vector<std::vector<int>> days;
    std::vector<int> travel;
    std::vector<char> used;
    double score = 0.0;
    double cost = 0.0;
    int total_travel = 0;
};

bool better(double s1, int t1, double s2, int t2) {
    if (s1 > s2 + kEps) {
        return true;
    }
    return s1 >= s2 - kEps && t1 < t2;
}

bool better(const Sol& a, const Sol& b) {
    return better(a.score, a.total_travel, b.score, b.total_travel);
}

Sol empty_sol(const Problem& p) {
    Sol s;
    s.days.assign(static_cast<std::size_t>(p.days), {});
    s.travel.assign(static_cast<std::size_t>(p.days), 0);
    s.used.assign(p.cands.size(), 0);
    return s;
}

/// A candidate neighbour: replaced day sequences plus score and cost deltas.
struct Change {
    std::vector<std::pair<int, std::vector<int>>> days;
    double score_delta = 0.0;
    double cost_delta = 0.0;
};

struct Eval {
    double score;
    int travel;
    std::vector<int> day_travels;
};

std::optional<Eval> evaluate(const Problem& p, const Sol& s, const Change& ch) {
    if (s.cost + ch.cost_delta > p.budget + kEps) {
        return std::nullopt;
    }
    Eval e{s.score + ch.score_delta, s.total_travel, {}};
    for (const auto& [d, seq] : ch.days) {
        const auto t = day_travel(p, d, seq);
        if (!t) {
            return std::nullopt;
        }
        e.travel += *t - s.travel[d];
        e.day_travels.push_back(*t);
    }
    return e;
}

void apply(Sol& s, Change ch, const Eval& e) {
    for (std::size_t i = 0; i < ch.days.size(); ++i) {
        const int d = ch.days[i].first;
        for (int c : s.days[d]) {
            s.used[c] = 0;
        }
        s.days[d] = std::move(ch.days[i].second);
        s.travel[d] = e.day_travels[i];
    }
    for (const auto& day : s.days) {
        for (int c : day) {
            s.used[c] = 1;
        }
    }
    s.score = e.score;
    s.cost += ch.cost_delta;
    s.total_travel = e.travel;
}

std::vector<int> inserted(const std::vector<int>& seq, std::size_t pos, int c) {
    std::vector<int> out = seq;
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), c);
    return out;
}

std::vector<int> erased(const std::vector<int>& seq, std::size_t pos) {
    std::vector<int> out = seq;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
    return out;
}

enum class Rule { ratio, score, value };

/// Repeated best insertion keyed by score/(1 + added travel), raw score, or score/(1 + cost); ties by poi id, day, position.
void greedy(const Problem& p, Sol& s, Rule rule, const std::vector<char>* banned = nullptr) {
    for (;;) {
        bool found = false;
        double best_key = 0.0;
        int best_delta = 0;
        int bc = -1;
        int bd = -1;
        std::size_t bpos = 0;
        int btravel = 0;
        for (int c = 0; c < static_cast<int>(p.cands.size()); ++c) {
            const auto& cand = p.cands[c];
            if (s.used[c] || !cand.insertable() || p.locked(c) || (banned && (*banned)[c])) {
                continue;
            }
            if (s.cost + cand.cost > p.budget + kEps) {
                continue;
            }
            for (int d = 0; d < p.days; ++d) {
                const auto& seq = s.days[d];
                if (static_cast<int>(seq.size()) >= p.cap) {
                    continue;
                }
                for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
                    const auto t = day_travel(p, d, inserted(seq, pos, c));
                    if (!t) {
                        continue;
                    }
                    const int delta = *t - s.travel[d];
                    double key = cand.score;
                    if (rule == Rule::ratio) {
                        key = cand.score / (1.0 + std::max(0, delta));
                    } else if (rule == Rule::value) {
                        key = cand.score / (1.0 + cand.cost);
                    }
                    const bool take = !found || key > best_key + kEps ||
                                      (rule != Rule::ratio && key >= best_key - kEps && delta < best_delta);
                    if (take) {
                        found = true;
                        best_key = key;
                        best_delta = delta;
                        bc = c;
                        bd = d;
                        bpos = pos;
                        btravel = *t;
                    }
                }
            }
        }
        if (!found) {
            return;
        }
        s.days[bd] = inserted(s.days[bd], bpos, bc);
        s.used[bc] = 1;
        s.score += p.cands[bc].score;
        s.cost += p.cands[bc].cost;
        s.total_travel += btravel - s.travel[bd];
        s.travel[bd] = btravel;
    }
}

/// One restaurant per day, best score first, at the cheapest feasible position.
void meal_first(const Problem& p, Sol& s) {
    for (int d = 0; d < p.days; ++d) {
        const auto& seq = s.days[d];
        if (std::any_of(seq.begin(), seq.end(), [&](int c) { return p.cands[c].restaurant; })) {
            continue;
        }
        int bc = -1;
        std::size_t bpos = 0;
        int btravel = 0;
        for (int c = 0; c < static_cast<int>(p.cands.size()); ++c) {
            const auto& cand = p.cands[c];
            if (!cand.restaurant || s.used[c] || !cand.insertable() || p.locked(c) ||
                s.cost + cand.cost > p.budget + kEps) {
                continue;
            }
            if (bc >= 0 && cand.score <= p.cands[bc].score + kEps) {
                continue;
            }
            for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
                const auto t = day_travel(p, d, inserted(seq, pos, c));
                if (t && (bc != c || *t < btravel)) {
                    bc = c;
                    bpos = pos;
                    btravel = *t;
                }
            }
        }
        if (bc >= 0) {
            s.days[d] = inserted(seq, bpos, bc);
            s.used[bc] = 1;
            s.score += p.cands[bc].score;
            s.cost += p.cands[bc].cost;
            s.total_travel += btravel - s.travel[d];
            s.travel[d] = btravel;
        }
    }
}

/// Tracks the best improving neighbour seen during one scan.
struct Best {
    std::optional<Change> change;
    std::optional<Eval> eval;

    void offer(const Problem& p, const Sol& s, Change ch) {
        auto e = evaluate(p, s, ch);
        if (!e) {
            return;
        }
        const double ref_score = eval ? eval->score : s.score;
        const int ref_travel = eval ? eval->travel : s.total_travel;
        if (better(e->score, e->travel, ref_score, ref_travel)) {
            eval = std::move(e);
            change = std::move(ch);
        }
    }
    bool commit(Sol& s) {
        if (!change) {
            return false;
        }
        apply(s, std::move(*change), *eval);
        return true;
    }
};

bool move_insert(const Problem& p, Sol& s) {
    Best best;
    for (int c = 0; c < static_cast<int>(p.cands.size()); ++c) {
        if (s.used[c] || !p.cands[c].insertable() || p.locked(c)) {
            continue;
        }
        for (int d = 0; d < p.days; ++d) {
            for (std::size_t pos = 0; pos <= s.days[d].size(); ++pos) {
                best.offer(p, s, Change{{{d, inserted(s.days[d], pos, c)}}, p.cands[c].score, p.cands[c].cost});
            }
        }
    }
    return best.commit(s);
}

bool move_replace(const Problem& p, Sol& s) {
    Best best;
    for (int a = 0; a < p.days; ++a) {
        for (std::size_t i = 0; i < s.days[a].size(); ++i) {
            const int v = s.days[a][i];
            if (p.locked(v)) {
                continue;
            }
            const auto without = erased(s.days[a], i);
            for (int c = 0; c < static_cast<int>(p.cands.size()); ++c) {
                if (s.used[c] || !p.cands[c].insertable() || p.locked(c) ||
                    p.cands[c].score < p.cands[v].score - kEps) {
                    continue;
                }
                const double ds = p.cands[c].score - p.cands[v].score;
                const double dc = p.cands[c].cost - p.cands[v].cost;
                for (int b = 0; b < p.days; ++b) {
                    const auto& base = b == a ? without : s.days[b];
                    for (std::size_t pos = 0; pos <= base.size(); ++pos) {
                        Change ch{{{b, inserted(base, pos, c)}}, ds, dc};
                        if (b != a) {
                            ch.days.emplace_back(a, without);
                        }
                        best.offer(p, s, std::move(ch));
                    }
                }
            }
        }
    }
    return best.commit(s);
}

bool move_relocate(const Problem& p, Sol& s) {
    Best best;
    for (int a = 0; a < p.days; ++a) {
        for (std::size_t i = 0; i < s.days[a].size(); ++i) {
            const int v = s.days[a][i];
            const auto without = erased(s.days[a], i);
            for (int b = 0; b < p.days; ++b) {
                if (p.locked(v) && b != a) {
                    continue;
                }
                const auto& base = b == a ? without : s.days[b];
                for (std::size_t pos = 0; pos <= base.size(); ++pos) {
                    if (b == a && pos == i) {
                        continue;
                    }
                    Change ch{{{b, inserted(base, pos, v)}}, 0.0, 0.0};
                    if (b != a) {
                        ch.days.emplace_back(a, without);
                    }
                    best.offer(p, s, std::move(ch));
                }
            }
        }
    }
    return best.commit(s);
}

bool move_swap(const Problem& p, Sol& s) {
    Best best;
    for (int a = 0; a < p.days; ++a) {
        for (int b = a + 1; b < p.days; ++b) {
            for (std::size_t i = 0; i < s.days[a].size(); ++i) {
                for (std::size_t j = 0; j < s.days[b].size(); ++j) {
                    const int u = s.days[a][i];
                    const int v = s.days[b][j];
                    if (p.locked(u) || p.locked(v)) {
                        continue;
                    }
                    auto da = s.days[a];
                    auto db = s.days[b];
                    da[i] = v;
                    db[j] = u;
                    best.offer(p, s, Change{{{a, std::move(da)}, {b, std::move(db)}}, 0.0, 0.0});
                }
            }
        }
    }
    return best.commit(s);
}

bool move_two_opt(const Problem& p, Sol& s) {
    Best best;
    for (int d = 0; d < p.days; ++d) {
        const auto& seq = s.days[d];
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            for (std::size_t j = i + 1; j < seq.size(); ++j) {
                auto r = seq;
                std::reverse(r.begin() + static_cast<std::ptrdiff_t>(i), r.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                best.offer(p, s, Change{{{d, std::move(r)}}, 0.0, 0.0});
            }
        }
    }
    return best.commit(s);
}

/// Remove one visit, refill greedily without it, then with it allowed again.
bool move_ruin_recreate(const Problem& p, Sol& s) {
    std::optional<Sol> best;
    for (int a = 0; a < p.days; ++a) {
        for (std::size_t i = 0; i < s.days[a].size(); ++i) {
            const int v = s.days[a][i];
            if (p.locked(v)) {
                continue;
            }
            Sol t = s;
            t.days[a] = erased(s.days[a], i);
            t.used[v] = 0;
            t.score -= p.cands[v].score;
            t.cost -= p.cands[v].cost;
            const auto tr = day_travel(p, a, t.days[a]);
            if (!tr) {
                continue;
            }
            t.total_travel += *tr - t.travel[a];
            t.travel[a] = *tr;
            std::vector<char> banned(p.cands.size(), 0);
            banned[v] = 1;
            greedy(p, t, Rule::ratio, &banned);
            greedy(p, t, Rule::ratio);
            if (better(t, best ? *best : s)) {
                best = std::move(t);
            }
        }
    }
    if (!best) {
        return false;
    }
    s = std::move(*best);
    return true;
}

void local_search(const Problem& p, Sol& s, PlanDiagnostics& diag) {
    using Move = bool (*)(const Problem&, Sol&);
    constexpr Move kMoves[] = {move_insert, move_replace, move_relocate, move_swap, move_two_opt, move_ruin_recreate};
    bool improved = true;
    for (int iteration = 0; improved && iteration < p.opt->iteration_cap; ++iteration) {
        ++diag.iterations;
        improved = false;
        for (const Move m : kMoves) {
            if (m(p, s)) {
                ++diag.improvements;
                improved = true;
                break;
            }
        }
    }
    greedy(p, s, Rule::ratio);
}

Problem make_problem(const TripRequest& request, const std::vector<catalog::Poi>& candidates,
                     const catalog::TravelMatrix& matrix, const PlannerOptions& options,
                     const std::set<std::string>& drops) {
    validate(request);
    Problem p;
    p.req = &request;
    p.opt = &options;
    p.matrix = &matrix;
    p.days = request.day_count();
    p.cap = options.visit_cap(request.pace);
    p.budget = request.budget_total;
    for (int d = 0; d < p.days; ++d) {
        p.weekday.push_back(weekday_index(request.date_of(d)));
    }
    std::map<std::string, const catalog::Poi*> by_id;
    for (const auto& poi : candidates) {
        if (drops.contains(poi.id)) {
            continue;
        }
        if (!by_id.emplace(poi.id, &poi).second) {
            throw ValidationError("candidates", "duplicate candidate " + poi.id);
        }
    }
    for (const auto& [id, poi] : by_id) {
        const auto mi = matrix.index_of(id);
        if (!mi) {
            throw ValidationError("matrix", "travel matrix does not cover " + id);
        }
        const auto sc = score_poi(*poi, request, options);
        Cand c;
        c.poi = poi;
        c.mi = *mi;
        c.score = sc.score;
        c.eligible = sc.eligible;
        c.ineligible_reason = sc.reason;
        c.cost = poi->cost_per_person * request.party_size();
        c.restaurant = poi->has_tag(catalog::kRestaurantTag);
        p.cands.push_back(c);
    }
    for (const auto& tag : {catalog::kFoodTag, catalog::kRestaurantTag}) {
        const auto it = request.preference_weights.find(tag);
        if (it != request.preference_weights.end() && it->second > 0.0) {
            p.food_first = true;
        }
    }
    p.lock_day.assign(p.cands.size(), -1);
    p.lock_order.assign(static_cast<std::size_t>(p.days), {});
    return p;
}

std::string rejection_reason(const Problem& p, const Sol& s, int c) {
    const auto& cand = p.cands[c];
    if (!cand.eligible) {
        return "restriction";
    }
    if (s.cost + cand.cost > p.budget + kEps) {
        return "budget";
    }
    if (cand.score <= kEps) {
        return "no-preference-match";
    }
    bool opens = false;
    for (int d = 0; d < p.days; ++d) {
        if (earliest_arrival(p, c, p.weekday[d], p.opt->day_start) >= 0) {
            opens = true;
        }
    }
    if (!opens) {
        return "opening-hours";
    }
    if (std::all_of(s.days.begin(), s.days.end(), [&](const auto& seq) { return static_cast<int>(seq.size()) >= p.cap; })) {
        return "pace";
    }
    if (cand.restaurant && std::all_of(s.days.begin(), s.days.end(), [&](const auto& seq) {
            return std::any_of(seq.begin(), seq.end(), [&](int x) { return p.cands[x].restaurant; });
        })) {
        return "meal";
    }
    return "time-window";
}

PlanResult finish(const Problem& p, const Sol& s, PlanDiagnostics diag) {
    PlanResult out;
    out.itinerary = empty_itinerary(*p.req, *p.opt);
    for (int d = 0; d < p.days; ++d) {
        std::vector<std::pair<int, int>> times;
        day_travel(p, d, s.days[d], &times);
        auto& day = out.itinerary.days[d];
        for (std::size_t i = 0; i < s.days[d].size(); ++i) {
            const auto& cand = p.cands[s.days[d][i]];
            day.visits.push_back(
                Visit{cand.poi->id, cand.poi->name, times[i].first, times[i].second, cand.cost, cand.score});
            if (i > 0) {
                const int prev = s.days[d][i - 1];
                day.legs.push_back(TravelLeg{p.cands[prev].poi->id, cand.poi->id, p.travel(prev, s.days[d][i])});
            }
        }
    }
    out.itinerary.totals = recompute_totals(out.itinerary);
    for (int c = 0; c < static_cast<int>(p.cands.size()); ++c) {
        if (!s.used[c]) {
            const auto reason = rejection_reason(p, s, c);
            ++diag.rejections[reason];
            diag.rejected_pois[p.cands[c].poi->id] = reason;
        }
    }
    out.diagnostics = std::move(diag);
    return out;
}

/// Removes a few random unlocked visits, refills greedily and re-optimizes. Seeded, so repeatable.
void perturb_rounds(const Problem& p, Sol& best, PlanDiagnostics& diag) {
    std::mt19937_64 rng(p.opt->perturbation_seed);
    for (int round = 0; round < p.opt->perturbation_rounds; ++round) {
        std::vector<std::pair<int, std::size_t>> slots;
        for (int d = 0; d < p.days; ++d) {
            for (std::size_t i = 0; i < best.days[d].size(); ++i) {
                if (!p.locked(best.days[d][i])) {
                    slots.emplace_back(d, i);
                }
            }
        }
        if (slots.size() < 2) {
            return;
        }
        std::shuffle(slots.begin(), slots.end(), rng);
        const std::size_t k = std::min<std::size_t>(slots.size(), 2 + rng() % 2);
        slots.resize(k);
        std::sort(slots.begin(), slots.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : a.second > b.second;
        });
        Sol s = best;
        std::vector<char> banned(p.cands.size(), 0);
        for (const auto& [d, i] : slots) {
            const int v = s.days[d][i];
            banned[v] = 1;
            s.used[v] = 0;
            s.score -= p.cands[v].score;
            s.cost -= p.cands[v].cost;
            s.days[d] = erased(s.days[d], i);
        }
        s.total_travel = 0;
        for (int d = 0; d < p.days; ++d) {
            s.travel[d] = *day_travel(p, d, s.days[d]);
            s.total_travel += s.travel[d];
        }
        greedy(p, s, static_cast<Rule>(round % 3), &banned);
        local_search(p, s, diag);
        if (better(s, best)) {
            best = std::move(s);
        }
    }
}

PlanResult solve(const Problem& p, const Sol& seed) {
    PlanDiagnostics diag;
    std::optional<Sol> best;
    for (const Rule rule : {Rule::ratio, Rule::score, Rule::value}) {
        Sol s = seed;
        if (p.food_first) {
            meal_first(p, s);
        }
        greedy(p, s, rule);
        local_search(p, s, diag);
        if (!best || better(s, *best)) {
            best = std::move(s);
        }
    }
    perturb_rounds(p, *best, diag);
    return finish(p, *best, std::move(diag));
}

}  // namespace

Itinerary empty_itinerary(const TripRequest& request, const PlannerOptions& options) {
    Itinerary it;
    for (int d = 0; d < request.day_count(); ++d) {
        DaySchedule day;
        day.date = request.date_of(d);
        day.window_start = options.day_start;
        day.window_end = options.day_end;
        it.days.push_back(std::move(day));
    }
    return it;
}

PlanResult plan(const TripRequest& request, const std::vector<catalog::Poi>& candidates,
                const catalog::TravelMatrix& matrix, const PlannerOptions& options) {
    const Problem p = make_problem(request, candidates, matrix, options, {});
    return solve(p, empty_sol(p));
}

PlanResult replan(const TripRequest& request, const Itinerary& current, const std::set<std::string>& locks,
                  const std::set<std::string>& drops, const std::vector<catalog::Poi>& candidates,
                  const catalog::TravelMatrix& matrix, const PlannerOptions& options) {
    for (const auto& id : locks) {
        if (drops.contains(id)) {
            throw ValidationError("locks", id + " is both locked and dropped");
        }
        if (!current.contains(id)) {
            throw ValidationError("locks", id + " is not in the current itinerary");
        }
    }
    Problem p = make_problem(request, candidates, matrix, options, drops);
    Sol s = empty_sol(p);
    std::map<std::string, int> index;
    for (int c = 0; c < static_cast<int>(p.cands.size()); ++c) {
        index[p.cands[c].poi->id] = c;
    }
    for (const auto& day : current.days) {
        for (const auto& v : day.visits) {
            if (!locks.contains(v.poi_id)) {
                continue;
            }
            const auto it = index.find(v.poi_id);
            if (it == index.end()) {
                throw ValidationError("locks", v.poi_id + " is no longer a candidate");
            }
            if (!p.cands[it->second].eligible) {
                throw ValidationError("locks", v.poi_id + " conflicts with the restrictions");
            }
            const auto d = static_cast<int>((day.date - request.start_date).count());
            if (d < 0 || d >= p.days) {
                throw ValidationError("locks", v.poi_id + " falls outside the trip dates");
            }
            p.lock_day[it->second] = d;
            p.lock_order[d].push_back(it->second);
        }
    }
    for (int d = 0; d < p.days; ++d) {
        s.days[d] = p.lock_order[d];
        const auto t = day_travel(p, d, s.days[d]);
        if (!t) {
            throw ValidationError("locks", fmt::format("locked visits no longer fit on {}", format_iso_date(request.date_of(d))));
        }
        s.travel[d] = *t;
        s.total_travel += *t;
        for (int c : s.days[d]) {
            s.used[c] = 1;
            s.score += p.cands[c].score;
            s.cost += p.cands[c].cost;
        }
    }
    if (s.cost > p.budget + kEps) {
        throw ValidationError("locks", "locked visits exceed the budget");
    }
    return solve(p, s);
}

void to_json(nlohmann::json& j, const Violation& v) {
    j = nlohmann::json{{"rule", v.rule}, {"element", v.element}, {"message", v.message}};
}

}  // namespace itinera::planner
