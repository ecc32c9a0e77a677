#include "itinera/dialogue/session.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"
#include "itinera/llm/narration.hpp"
#include "itinera/llm/persona.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

namespace itinera::dialogue {

namespace {

constexpr std::string_view kPhaseNames[] = {"collecting", "proposing", "refining", "closed"};
constexpr std::string_view kVerdictNames[] = {"accept", "reject", "rating"};
constexpr std::string_view kActionNames[] = {"plan", "answer", "export"};

constexpr int kMaxNights = 60;

constexpr Slot kSlotOrder[] = {Slot::destination, Slot::dates, Slot::party, Slot::preferences, Slot::budget};

Verdict verdict_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kVerdictNames); ++i) {
        if (kVerdictNames[i] == s) {
            return static_cast<Verdict>(i);
        }
    }
    throw ValidationError("verdict", "unknown verdict '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Phase p) {
    return kPhaseNames[static_cast<std::size_t>(p)];
}

Phase phase_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kPhaseNames); ++i) {
        if (kPhaseNames[i] == s) {
            return static_cast<Phase>(i);
        }
    }
    throw ValidationError("phase", "unknown phase '" + std::string(s) + "'");
}

std::string_view to_string(ActionKind k) {
    return kActionNames[static_cast<std::size_t>(k)];
}

void validate(const FeedbackEvent& e) {
    if (e.target.empty()) {
        throw ValidationError("target", "feedback needs a poi id or day index");
    }
    if (e.verdict == Verdict::rating && (e.rating < 1 || e.rating > 5)) {
        throw ValidationError("rating", "must be within 1..5, got " + std::to_string(e.rating));
    }
}

bool SessionState::filled(Slot s) const {
    switch (s) {
        case Slot::destination: return collected.destination.has_value();
        case Slot::dates: return collected.start_date && collected.end_date;
        case Slot::party: return collected.adults.has_value();
        case Slot::preferences:
            return std::any_of(collected.preference_weights.begin(), collected.preference_weights.end(),
                               [](const auto& kv) { return kv.second > 0.0; });
        case Slot::budget: return collected.budget_total.has_value();
        case Slot::none: return true;
    }
    return false;
}

Slot SessionState::first_unfilled() const {
    for (const auto s : kSlotOrder) {
        if (!filled(s)) {
            return s;
        }
    }
    return Slot::none;
}

planner::TripRequest SessionState::request() const {
    if (first_unfilled() != Slot::none) {
        throw ValidationError(std::string(to_string(first_unfilled())), "slot not filled yet");
    }
    planner::TripRequest r;
    r.destination = *collected.destination;
    r.start_date = *collected.start_date;
    r.end_date = *collected.end_date;
    r.adults = *collected.adults;
    r.children = collected.children.value_or(0);
    r.preference_weights = collected.preference_weights;
    r.budget_total = *collected.budget_total;
    r.restrictions = collected.restrictions;
    r.pace = collected.pace.value_or(planner::Pace::normal);
    return r;
}

void to_json(nlohmann::json& j, const FeedbackEvent& e) {
    j = {{"target", e.target}, {"verdict", kVerdictNames[static_cast<std::size_t>(e.verdict)]}, {"ts", e.ts}};
    if (e.verdict == Verdict::rating) {
        j["rating"] = e.rating;
    }
}

void from_json(const nlohmann::json& j, FeedbackEvent& e) {
    e.target = j.at("target").get<std::string>();
    e.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    e.rating = j.value("rating", 0);
    e.ts = j.value("ts", std::int64_t{0});
}

void to_json(nlohmann::json& j, const SessionState& s) {
    j = {{"session_id", s.session_id},
         {"language", s.language},
         {"reference_date", format_iso_date(s.reference_date)},
         {"created_ms", s.created_ms},
         {"phase", to_string(s.phase)},
         {"collected", s.collected},
         {"pending_slot", to_string(s.pending_slot)},
         {"narration", s.narration},
         {"locks", s.locks},
         {"drops", s.drops},
         {"feedback", s.feedback},
         {"event_count", s.event_count}};
    auto& t = j["transcript"] = nlohmann::json::array();
    for (const auto& e : s.transcript) {
        t.push_back({{"role", e.role}, {"text", e.text}, {"ts", e.ts}});
    }
    j["itinerary"] = s.current_itinerary ? nlohmann::json(*s.current_itinerary) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, SessionState& s) {
    s = SessionState{};
    s.session_id = j.at("session_id").get<std::string>();
    s.language = j.at("language").get<std::string>();
    s.reference_date = parse_iso_date(j.at("reference_date").get<std::string>()).value();
    s.created_ms = j.at("created_ms").get<std::int64_t>();
    s.phase = phase_from_string(j.at("phase").get<std::string>());
    s.collected = j.at("collected").get<SlotUpdate>();
    s.pending_slot = slot_from_string(j.at("pending_slot").get<std::string>());
    s.narration = j.at("narration").get<std::string>();
    s.locks = j.at("locks").get<std::set<std::string>>();
    s.drops = j.at("drops").get<std::set<std::string>>();
    s.feedback = j.at("feedback").get<std::vector<FeedbackEvent>>();
    s.event_count = j.at("event_count").get<std::size_t>();
    for (const auto& e : j.at("transcript")) {
        s.transcript.push_back({e.at("role").get<std::string>(), e.at("text").get<std::string>(), e.at("ts").get<std::int64_t>()});
    }
    if (!j.at("itinerary").is_null()) {
        s.current_itinerary = j.at("itinerary").get<planner::Itinerary>();
    }
}

void apply_event(SessionState& s, const Event& e) {
    const auto type = e.at("type").get<std::string>();
    if (type == "created") {
        s = SessionState{};
        s.session_id = e.at("session_id").get<std::string>();
        s.language = e.at("language").get<std::string>();
        s.reference_date = parse_iso_date(e.at("reference_date").get<std::string>()).value();
        s.created_ms = e.at("ts").get<std::int64_t>();
    } else if (type == "message") {
        s.transcript.push_back({e.at("role").get<std::string>(), e.at("text").get<std::string>(), e.at("ts").get<std::int64_t>()});
    } else if (type == "slots") {
        s.collected = e.at("collected").get<SlotUpdate>();
        s.pending_slot = slot_from_string(e.at("pending").get<std::string>());
    } else if (type == "phase") {
        s.phase = phase_from_string(e.at("phase").get<std::string>());
    } else if (type == "itinerary") {
        if (e.at("itinerary").is_null()) {
            s.current_itinerary.reset();
        } else {
            s.current_itinerary = e.at("itinerary").get<planner::Itinerary>();
        }
    } else if (type == "narration") {
        s.narration = e.at("text").get<std::string>();
    } else if (type == "refine") {
        s.locks = e.at("locks").get<std::set<std::string>>();
        s.drops = e.at("drops").get<std::set<std::string>>();
    } else if (type == "feedback") {
        s.feedback.push_back(e.at("event").get<FeedbackEvent>());
    } else {
        throw ValidationError("event", "unknown event type '" + type + "'");
    }
    ++s.event_count;
}

const StringTable& DialogueResources::text(const std::string& language) const {
    const auto it = strings.find(language);
    if (it == strings.end()) {
        throw ValidationError("language", "unsupported language '" + language + "'");
    }
    return it->second;
}

DialogueResources load_dialogue_resources(const std::filesystem::path& data_dir) {
    DialogueResources r;
    r.strings = load_string_tables(data_dir / "strings");
    r.lexicon = load_lexicon(data_dir / "lexicon");
    return r;
}

bool merge_update(SlotUpdate& c, const SlotUpdate& u, Date reference) {
    using std::chrono::days;
    if (u.destination) {
        c.destination = u.destination;
    }
    auto start = c.start_date;
    auto end = c.end_date;
    if (u.start_date && u.end_date) {
        start = u.start_date;
        end = u.end_date;
    } else if (u.start_date && u.nights) {
        start = u.start_date;
        end = *u.start_date + days(*u.nights);
    } else if (u.nights) {
        start = start.value_or(reference);
        end = *start + days(*u.nights);
    } else if (u.start_date) {
        // a new departure keeps the trip length when one is known
        if (start && end) {
            end = *u.start_date + (*end - *start);
        }
        start = u.start_date;
    } else if (u.end_date) {
        end = u.end_date;
    }
    if (start && end && (*end < *start || *end - *start > days(kMaxNights))) {
        return false;
    }
    c.start_date = start;
    c.end_date = end;
    c.nights.reset();
    if (u.adults) {
        c.adults = u.adults;
    }
    if (u.children) {
        c.children = u.children;
    }
    for (const auto& [tag, w] : u.preference_weights) {
        c.preference_weights[tag] = w;
    }
    c.restrictions.insert(u.restrictions.begin(), u.restrictions.end());
    if (u.budget_total) {
        c.budget_total = u.budget_total;
    }
    if (u.pace) {
        c.pace = u.pace;
    }
    return true;
}

std::vector<PoiMention> match_pois(const std::vector<Token>& tokens, const std::vector<catalog::Poi>& places,
                                   const std::set<std::string>& planned, const Lexicon& lx) {
    struct Hit {
        PoiMention m;
        bool full = false;
    };
    std::vector<Hit> hits;
    const auto close = [](const std::string& a, const std::string& b) {
        return a == b || (a.size() >= 6 && b.size() >= 6 && text::edit_distance(a, b) <= 1);
    };
    std::map<std::string, std::vector<std::string>> kind_owners;  // kind word -> planned places carrying it
    for (const auto& p : places) {
        const auto name = text::words(p.name);
        bool found = false;
        // full name, in order
        for (std::size_t i = 0; i + name.size() <= tokens.size() && !found; ++i) {
            bool ok = true;
            for (std::size_t k = 0; k < name.size() && ok; ++k) {
                ok = close(tokens[i + k].word, name[k]);
            }
            if (ok) {
                hits.push_back({{i, name.size(), p.id}, true});
                found = true;
            }
        }
        // any distinctive word
        for (std::size_t i = 0; i < tokens.size() && !found; ++i) {
            for (const auto& w : name) {
                if (w.size() < 4 || lx.place_articles.contains(w) || lx.place_kinds.contains(w) ||
                    lx.place_qualifiers.contains(w)) {
                    continue;
                }
                if (close(tokens[i].word, w)) {
                    hits.push_back({{i, 1, p.id}, false});
                    found = true;
                    break;
                }
            }
        }
        if (planned.contains(p.id)) {
            for (const auto& w : name) {
                if (lx.place_kinds.contains(w)) {
                    kind_owners[w].push_back(p.id);
                }
            }
        }
    }
    // a lone kind word names the only planned place of that kind
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = kind_owners.find(tokens[i].word);
        if (it == kind_owners.end()) {
            // plural forms as written in the lexicon ("musei" -> "museo")
            for (const auto& [kind, owners] : kind_owners) {
                if (kind.size() >= 5 && tokens[i].word.size() >= 5 && tokens[i].word.substr(0, 4) == kind.substr(0, 4)) {
                    it = kind_owners.find(kind);
                }
            }
        }
        if (it == kind_owners.end() || it->second.size() != 1) {
            continue;
        }
        const bool covered = std::any_of(hits.begin(), hits.end(), [&](const Hit& h) {
            return i >= h.m.position && i < h.m.position + h.m.length;
        });
        if (!covered) {
            hits.push_back({{i, 1, it->second.front()}, false});
        }
    }
    // drop hits nested in a longer one; on identical spans prefer planned places
    std::vector<PoiMention> out;
    for (const auto& h : hits) {
        bool keep = true;
        for (const auto& o : hits) {
            if (&o == &h) {
                continue;
            }
            const bool inside = o.m.position <= h.m.position &&
                                h.m.position + h.m.length <= o.m.position + o.m.length;
            const bool same = inside && o.m.position == h.m.position && o.m.length == h.m.length;
            if (inside && !same) {
                keep = false;
            } else if (same && (o.full > h.full || (o.full == h.full && planned.contains(o.m.poi_id) &&
                                                    !planned.contains(h.m.poi_id)))) {
                keep = false;
            }
        }
        if (keep && std::none_of(out.begin(), out.end(), [&](const PoiMention& m) { return m.poi_id == h.m.poi_id; })) {
            out.push_back(h.m);
        }
    }
    std::sort(out.begin(), out.end(), [](const PoiMention& a, const PoiMention& b) {
        return std::tie(a.position, a.poi_id) < std::tie(b.position, b.poi_id);
    });
    return out;
}

SessionState create_session(const std::string& session_id, const std::string& language, DialogueContext& ctx,
                            std::vector<Event>* events) {
    if (std::find(llm::kLanguages.begin(), llm::kLanguages.end(), language) == llm::kLanguages.end()) {
        throw ValidationError("language", "unsupported language '" + language + "', expected it or en");
    }
    if (session_id.empty()) {
        throw ValidationError("session_id", "must not be empty");
    }
    const auto now = ctx.clock.now_ms();
    const Event created = {{"type", "created"},
                           {"session_id", session_id},
                           {"language", language},
                           {"reference_date", format_iso_date(date_from_epoch_ms(now))},
                           {"ts", now}};
    SessionState s;
    apply_event(s, created);
    if (events) {
        events->push_back(created);
    }
    return s;
}

namespace {

std::string names_of(const std::vector<std::string>& ids, const catalog::Catalog& catalog) {
    std::vector<std::string> names;
    for (const auto& id : ids) {
        const auto p = catalog.get(id);
        names.push_back(p ? p->name : id);
    }
    return text::join(names, ", ");
}

std::vector<std::string> planned_ids(const SessionState& s) {
    std::vector<std::string> out;
    if (s.current_itinerary) {
        for (const auto& d : s.current_itinerary->days) {
            for (const auto& v : d.visits) {
                out.push_back(v.poi_id);
            }
        }
    }
    return out;
}

}  // namespace

PromptSpec next_prompt(const SessionState& s, const DialogueContext& ctx) {
    if (s.phase == Phase::closed) {
        throw TerminalStateError("session " + s.session_id + " is closed");
    }
    const auto& t = ctx.resources.text(s.language);
    PromptSpec p;
    if (s.phase != Phase::collecting) {
        p.question = t.get("ask.review");
        p.quick_replies = {t.get("quick.review.1"), t.get("quick.review.2")};
        return p;
    }
    p.expected_slot = s.first_unfilled();
    const auto destinations = ctx.catalog.destinations();
    switch (p.expected_slot) {
        case Slot::destination:
            p.question = t.get("ask.destination", {{"options", text::join(destinations, ", ")}});
            p.quick_replies = destinations;
            break;
        case Slot::dates:
            p.question = s.collected.start_date ? t.get("ask.nights")
                                                : t.get("ask.dates", {{"destination", *s.collected.destination}});
            break;
        case Slot::party:
            p.question = t.get("ask.party");
            p.quick_replies = {t.get("quick.party.1"), t.get("quick.party.2"), t.get("quick.party.3")};
            break;
        case Slot::preferences:
            p.question = t.get("ask.preferences");
            for (const auto& tag : ctx.catalog.tags(s.collected.destination.value_or(""))) {
                if (t.has("tag." + tag)) {
                    p.quick_replies.push_back(t.get("tag." + tag));
                }
            }
            break;
        case Slot::budget:
            p.question = t.get("ask.budget");
            p.quick_replies = {t.get("quick.budget.1"), t.get("quick.budget.2"), t.get("quick.budget.3")};
            break;
        case Slot::none: break;
    }
    return p;
}

namespace {

struct Turn {
    SessionState& s;
    DialogueContext& ctx;
    ActionRunner& runner;
    ApplyResult& result;
    const StringTable& t;
    std::vector<std::string> parts;

    void emit(Event e) {
        apply_event(s, e);
        result.events.push_back(std::move(e));
    }

    void run(Action a) {
        result.actions.push_back(a);
        auto out = runner.run(a, s);
        for (auto& e : out.events) {
            emit(std::move(e));
        }
        if (!out.reply.empty()) {
            parts.push_back(std::move(out.reply));
        }
    }

    void feedback(const std::string& target, Verdict v, int rating = 0) {
        FeedbackEvent f{target, v, rating, ctx.clock.now_ms()};
        validate(f);
        emit({{"type", "feedback"}, {"event", f}});
    }

    void refine(const std::set<std::string>& locks, const std::set<std::string>& drops) {
        if (locks != s.locks || drops != s.drops) {
            emit({{"type", "refine"}, {"locks", locks}, {"drops", drops}});
        }
    }

    // Merges `u`; false when nothing changed. Contradictory dates are reported and skipped.
    bool merge(SlotUpdate u, Slot next_pending_hint) {
        std::string why;
        if (u.start_date && u.end_date && *u.end_date < *u.start_date) {
            parts.push_back(t.get("invalid.dates"));
            u.start_date.reset();
            u.end_date.reset();
            u.nights.reset();
        }
        if (!is_valid(u, &why)) {
            spdlog::info("session {}: rejected update: {}", s.session_id, why);
            parts.push_back(t.get("invalid.value"));
            return false;
        }
        auto collected = s.collected;
        if (!merge_update(collected, u, s.reference_date)) {
            parts.push_back(t.get("invalid.dates"));
            u.start_date.reset();
            u.end_date.reset();
            u.nights.reset();
            merge_update(collected, u, s.reference_date);
        }
        SessionState probe = s;
        probe.collected = collected;
        const Slot pending = next_pending_hint == Slot::none ? Slot::none : probe.first_unfilled();
        if (collected == s.collected && pending == s.pending_slot) {
            return false;
        }
        const bool changed = collected != s.collected;
        emit({{"type", "slots"}, {"collected", collected}, {"pending", to_string(pending)}});
        return changed;
    }

    void collect(const std::string& message) {
        const auto& lx = ctx.resources.lexicon;
        auto u = extract_slots(tokenize(message, lx), s.pending_slot, lx, ctx.catalog.destinations(), s.reference_date);
        if (u.empty() && ctx.extraction_fallback) {
            u = llm::extract_structured(message, std::string(to_string(s.pending_slot)), s.language, *ctx.extraction_fallback);
            if (u.destination) {
                const auto found = find_destinations(tokenize(*u.destination, lx), ctx.catalog.destinations());
                if (found.empty()) {
                    u.destination.reset();
                } else {
                    u.destination = found.front();
                }
            }
        }
        const bool changed = merge(u, Slot::destination);
        if (s.first_unfilled() == Slot::none) {
            emit({{"type", "phase"}, {"phase", to_string(Phase::proposing)}});
            run(Action{ActionKind::plan, {}});
            parts.push_back(t.get("ask.review"));
            return;
        }
        if (!changed && parts.empty()) {
            parts.push_back(t.get("reask"));
            if (s.pending_slot == Slot::destination) {
                parts.push_back(t.get("unknown.destination", {{"options", text::join(ctx.catalog.destinations(), ", ")}}));
                return;
            }
        }
        parts.push_back(next_prompt(s, ctx).question);
    }

    std::optional<int> rating_in(const std::vector<Token>& tokens, std::optional<int>& day) const {
        std::optional<int> rating;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!tokens[i].number || *tokens[i].number != std::floor(*tokens[i].number)) {
                continue;
            }
            const int v = static_cast<int>(*tokens[i].number);
            if (i > 0 && (tokens[i - 1].word == "giorno" || tokens[i - 1].word == "day")) {
                day = v;
            } else if (!rating) {
                rating = v;
            }
        }
        return rating;
    }

    void refine_turn(const std::string& message) {
        const auto& lx = ctx.resources.lexicon;
        auto tokens = tokenize(message, lx);
        std::vector<std::string> words;
        for (const auto& tok : tokens) {
            words.push_back(tok.punct ? std::string() : tok.word);
        }
        const auto intent_hits = find_phrases(words, lx.intents);
        std::set<std::string> intents;
        for (const auto& [_, p] : intent_hits) {
            intents.insert(p->value);
        }
        if (intents.contains("download")) {
            emit({{"type", "phase"}, {"phase", to_string(Phase::closed)}});
            run(Action{ActionKind::export_document, {}});
            return;
        }

        const auto planned_list = planned_ids(s);
        const std::set<std::string> planned(planned_list.begin(), planned_list.end());
        const auto places = ctx.catalog.find_pois(*s.collected.destination, {}, ctx.catalog.size());
        const auto mentions = match_pois(tokens, places, planned, lx);

        auto blanked = tokens;
        for (const auto& m : mentions) {
            for (std::size_t k = m.position; k < m.position + m.length; ++k) {
                blanked[k].word.clear();
                blanked[k].number.reset();
            }
        }
        auto u = extract_slots(blanked, Slot::none, lx, ctx.catalog.destinations(), s.reference_date);
        if (!mentions.empty() || u.destination == s.collected.destination) {
            u.destination.reset();
        }
        const bool targeted = intents.contains("drop") || intents.contains("lock") || intents.contains("rating");
        if (targeted) {
            u.preference_weights.clear();
        }

        bool acted = false;
        bool replan = false;
        if (intents.contains("rating")) {
            std::optional<int> day;
            const auto rating = rating_in(blanked, day);
            std::string target = !mentions.empty() ? mentions.front().poi_id
                               : day                ? "day:" + std::to_string(*day - 1)
                                                    : std::string();
            if (rating && !target.empty()) {
                acted = true;
                if (*rating < 1 || *rating > 5) {
                    parts.push_back(t.get("rating.invalid"));
                } else {
                    feedback(target, Verdict::rating, *rating);
                    parts.push_back(t.get("rating.thanks"));
                }
                u.budget_total.reset();
                u.adults.reset();
            } else if (!target.empty() || rating) {
                acted = true;
                parts.push_back(t.get("refine.which"));
            }
        } else {
            std::vector<std::string> dropped;
            std::vector<std::string> locked;
            for (const auto& m : mentions) {
                const std::string* intent = nullptr;
                for (const auto& [pos, p] : intent_hits) {
                    if ((p->value == "drop" || p->value == "lock") && (pos < m.position || !intent)) {
                        intent = &p->value;
                    }
                }
                if (!intent) {
                    continue;
                }
                if (*intent == "drop") {
                    dropped.push_back(m.poi_id);
                } else if (planned.contains(m.poi_id)) {
                    locked.push_back(m.poi_id);
                }
            }
            auto locks = s.locks;
            auto drops = s.drops;
            for (const auto& id : dropped) {
                drops.insert(id);
                locks.erase(id);
                feedback(id, Verdict::reject);
            }
            for (const auto& id : locked) {
                locks.insert(id);
                drops.erase(id);
                feedback(id, Verdict::accept);
            }
            refine(locks, drops);
            if (!dropped.empty()) {
                parts.push_back(t.get("refine.dropped", {{"names", names_of(dropped, ctx.catalog)}}));
                replan = replan || std::any_of(dropped.begin(), dropped.end(), [&](const auto& id) { return planned.contains(id); });
                acted = true;
            }
            if (!locked.empty()) {
                parts.push_back(t.get("refine.locked", {{"names", names_of(locked, ctx.catalog)}}));
                acted = true;
            }
            if ((intents.contains("drop") || intents.contains("lock")) && dropped.empty() && locked.empty() && u.empty()) {
                parts.push_back(t.get("refine.which"));
                acted = true;
            }
        }

        if (!u.empty()) {
            const bool new_destination = u.destination.has_value();
            if (merge(u, Slot::none)) {
                acted = true;
                replan = true;
                if (new_destination) {
                    refine({}, {});
                }
            }
        }

        if (!acted && intents.contains("accept")) {
            for (const auto& id : planned_list) {
                feedback(id, Verdict::accept);
            }
            parts.push_back(t.get("accept.thanks"));
            acted = true;
        }
        if (acted && s.phase == Phase::proposing) {
            emit({{"type", "phase"}, {"phase", to_string(Phase::refining)}});
        }
        if (replan) {
            run(Action{ActionKind::plan, {}});
        }
        if (!acted && (message.find('?') != std::string::npos || intents.contains("question"))) {
            run(Action{ActionKind::answer, message});
            return;
        }
        if (!acted) {
            parts.push_back(t.get("reask"));
        }
        parts.push_back(t.get("ask.review"));
    }
};

}  // namespace

ApplyResult apply_message(SessionState& s, const std::string& message, DialogueContext& ctx, ActionRunner& runner) {
    if (s.phase == Phase::closed) {
        throw TerminalStateError("session " + s.session_id + " is closed");
    }
    ApplyResult result;
    Turn turn{s, ctx, runner, result, ctx.resources.text(s.language), {}};
    const auto clean = text::sanitize_utf8(message);
    turn.emit({{"type", "message"}, {"role", "user"}, {"text", clean}, {"ts", ctx.clock.now_ms()}});
    if (s.phase == Phase::collecting) {
        turn.collect(clean);
    } else {
        turn.refine_turn(clean);
    }
    result.reply = text::join(turn.parts, "\n\n");
    turn.emit({{"type", "message"}, {"role", "assistant"}, {"text", result.reply}, {"ts", ctx.clock.now_ms()}});
    return result;
}

std::vector<Event> record_feedback(SessionState& s, FeedbackEvent event) {
    if (s.phase == Phase::collecting) {
        throw ValidationError("phase", "feedback is accepted once an itinerary has been proposed");
    }
    validate(event);
    Event e = {{"type", "feedback"}, {"event", event}};
    apply_event(s, e);
    return {e};
}

std::vector<SimilarProfile> similar_profiles(const planner::TripRequest& request, const std::vector<SessionState>& sessions,
                                             std::size_t k) {
    std::set<std::string> tags;
    for (const auto& [tag, _] : request.preference_weights) {
        tags.insert(tag);
    }
    for (const auto& s : sessions) {
        if (s.phase == Phase::closed) {
            for (const auto& [tag, _] : s.collected.preference_weights) {
                tags.insert(tag);
            }
        }
    }
    const auto vec = [&](const std::map<std::string, double>& w) {
        std::vector<double> v;
        for (const auto& tag : tags) {
            const auto it = w.find(tag);
            v.push_back(it == w.end() ? 0.0 : it->second);
        }
        return v;
    };
    const auto q = vec(request.preference_weights);
    std::vector<SimilarProfile> out;
    for (const auto& s : sessions) {
        if (s.phase != Phase::closed) {
            continue;
        }
        const auto v = vec(s.collected.preference_weights);
        double dot = 0.0;
        double nq = 0.0;
        double nv = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            dot += q[i] * v[i];
            nq += q[i] * q[i];
            nv += v[i] * v[i];
        }
        const double sim = nq > 0.0 && nv > 0.0 ? dot / (std::sqrt(nq) * std::sqrt(nv)) : 0.0;
        out.push_back({s.session_id, std::clamp(sim, -1.0, 1.0)});
    }
    std::sort(out.begin(), out.end(), [](const SimilarProfile& a, const SimilarProfile& b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity : a.session_id < b.session_id;
    });
    if (out.size() > k) {
        out.resize(k);
    }
    return out;
}

}  // namespace itinera::dialogue
