#include "itinera/api/service.hpp"

#include "itinera/api/export.hpp"
#include "itinera/catalog/travel_matrix.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/llm/narration.hpp"
#include "itinera/retrieval/prompt.hpp"

#include <algorithm>
#include <cstdlib>
#include <spdlog/spdlog.h>

namespace itinera::api {

namespace fs = std::filesystem;
using dialogue::ActionKind;
using dialogue::Phase;

nlohmann::json to_json(const dialogue::PromptSpec& p) {
    return {{"question", p.question},
            {"expected_slot", dialogue::to_string(p.expected_slot)},
            {"quick_replies", p.quick_replies}};
}

class Service::Runner final : public dialogue::ActionRunner {
public:
    explicit Runner(Service& svc) : svc_(svc) {}

    dialogue::ActionOutcome run(const dialogue::Action& action, const dialogue::SessionState& s) override {
        switch (action.kind) {
            case ActionKind::plan: return plan(s);
            case ActionKind::answer: return answer(action.text, s);
            case ActionKind::export_document: {
                dialogue::ActionOutcome out;
                out.reply = svc_.strings(s.language).get("export.ready",
                                                         {{"link", "/sessions/" + s.session_id + "/export"}});
                return out;
            }
        }
        return {};
    }

private:
    dialogue::ActionOutcome plan(const dialogue::SessionState& s) {
        dialogue::ActionOutcome out;
        const auto& t = svc_.strings(s.language);
        const auto request = s.request();
        auto options = svc_.planner_options();
        options.bonus_tags = svc_.similar_tags(request);
        const auto pois = svc_.candidates(request, s.drops);
        const auto matrix = catalog::build_matrix(pois, catalog::travel_mode_from_string(svc_.config_.travel_mode));

        std::vector<std::string> parts;
        planner::PlanResult result;
        try {
            result = s.current_itinerary && !s.locks.empty()
                         ? planner::replan(request, *s.current_itinerary, s.locks, s.drops, pois, matrix, options)
                         : planner::plan(request, pois, matrix, options);
        } catch (const ValidationError& e) {
            // locks that no longer fit (dates changed) are released rather than failing the turn
            spdlog::info("session {}: releasing locks: {}", s.session_id, e.what());
            out.events.push_back({{"type", "refine"}, {"locks", nlohmann::json::array()}, {"drops", s.drops}});
            parts.push_back(t.get("refine.locks_released"));
            result = planner::plan(request, pois, matrix, options);
        }
        const auto narration = llm::narrate_itinerary(result.itinerary, pois, svc_.persona_, s.language, *svc_.chat_);
        if (narration.degraded) {
            spdlog::warn("session {}: narration provider unavailable, template used", s.session_id);
        }
        out.events.push_back({{"type", "itinerary"}, {"itinerary", result.itinerary}});
        out.events.push_back({{"type", "narration"}, {"text", narration.text}});
        parts.push_back(result.itinerary.visit_count() == 0 ? t.get("plan.empty") : narration.text);
        out.reply = parts.size() == 1 ? parts[0] : parts[0] + "\n\n" + parts[1];
        return out;
    }

    dialogue::ActionOutcome answer(const std::string& question, const dialogue::SessionState& s) {
        dialogue::ActionOutcome out;
        std::vector<retrieval::RetrievalHit> hits;
        if (svc_.index_) {
            try {
                hits = svc_.index_->query(question, svc_.config_.retrieval_k, *svc_.embedder_);
            } catch (const ProviderError& e) {
                spdlog::warn("session {}: retrieval unavailable: {}", s.session_id, e.what());
            }
        }
        std::vector<catalog::Poi> live;
        if (s.current_itinerary) {
            for (const auto& day : s.current_itinerary->days) {
                for (const auto& v : day.visits) {
                    if (auto p = svc_.catalog_.get(v.poi_id)) {
                        live.push_back(std::move(*p));
                    }
                }
            }
        }
        const auto& style = svc_.persona_.style(s.language);
        const auto prompt =
            retrieval::augment_prompt(style.preamble, question, std::move(hits), live, svc_.config_.retrieval_budget_tokens);
        llm::CompletionRequest req;
        req.messages.push_back({"user", prompt.text});
        req.temperature = 0.3;
        req.max_tokens = 400;
        req.language = s.language;
        try {
            out.reply = svc_.chat_->complete(req);
        } catch (const ProviderError& e) {
            spdlog::warn("session {}: answer unavailable: {}", s.session_id, e.what());
            out.reply = svc_.strings(s.language).get("answer.unavailable");
        }
        return out;
    }

    Service& svc_;
};

namespace {

std::string env_or_empty(const std::string& name) {
    const char* v = name.empty() ? nullptr : std::getenv(name.c_str());
    return v == nullptr ? std::string() : std::string(v);
}

}  // namespace

std::unique_ptr<retrieval::Embedder> make_embedder(const ApiConfig& config, bool* configured) {
    if (configured != nullptr) {
        *configured = true;
    }
    if (config.embed_provider == "mock") {
        return std::make_unique<retrieval::MockEmbedder>();
    }
    retrieval::HttpEmbedderConfig c;
    c.api = config.embed_provider == "cohere" ? retrieval::EmbeddingApi::cohere : retrieval::EmbeddingApi::openai;
    c.base_url = config.embed_base_url;
    c.model = config.embed_model;
    c.api_key = env_or_empty(config.embed_api_key_env);
    c.dim = config.embed_dim;
    if (configured != nullptr) {
        *configured = !c.api_key.empty();
    }
    return std::make_unique<retrieval::HttpEmbedder>(std::move(c));
}

Service::Service(ApiConfig config, ServiceOptions options) : config_(std::move(config)) {
    prepare(config_);
    clock_ = options.clock ? options.clock : std::make_shared<SystemClock>();
    catalog_.load_jsonl(config_.resolved_catalog());
    resources_ = dialogue::load_dialogue_resources(config_.data_dir);
    persona_ = llm::load_persona(config_.data_dir / "persona.json");

    if (options.chat) {
        chat_ = std::move(options.chat);
    } else if (config_.chat_provider == "mock") {
        chat_ = std::make_unique<llm::MockChatProvider>();
    } else {
        llm::OpenAiConfig c;
        c.base_url = config_.chat_base_url;
        c.model = config_.chat_model;
        c.api_key = env_or_empty(config_.chat_api_key_env);
        c.timeout_ms = config_.chat_timeout_ms;
        c.max_attempts = config_.chat_max_attempts;
        c.max_concurrency = config_.chat_max_concurrency;
        chat_configured_ = !c.api_key.empty();
        if (!chat_configured_) {
            spdlog::warn("{} is not set; model calls will fail and fall back to templates", config_.chat_api_key_env);
        }
        chat_ = std::make_unique<llm::OpenAiChatProvider>(std::move(c), clock_);
    }

    embedder_ = options.embedder ? std::move(options.embedder) : make_embedder(config_, &embed_configured_);

    const auto index_path = config_.resolved_index();
    index_status_ = "absent";
    if (fs::exists(index_path)) {
        try {
            auto index = retrieval::VectorIndex::load(index_path);
            if (index.dim() != embedder_->dim()) {
                spdlog::error("index {} has dimension {}, embedder produces {}", index_path.string(), index.dim(),
                              embedder_->dim());
                index_status_ = "dimension_mismatch";
            } else {
                index_.emplace(std::move(index));
                index_status_ = "loaded";
            }
        } catch (const std::exception& e) {
            spdlog::error("cannot load index {}: {}", index_path.string(), e.what());
            index_status_ = "unreadable";
        }
    }

    store_ = std::make_unique<dialogue::SessionStore>(
        config_.state_dir, config_.snapshot_every,
        options.id_generator ? options.id_generator : std::function<std::string()>(dialogue::random_session_id));
    for (const auto& id : store_->ids()) {
        try {
            auto entry = std::make_shared<Entry>();
            entry->state = store_->load(id);
            if (entry->state.phase == Phase::closed) {
                closed_.push_back(entry->state);
            }
            sessions_.emplace(id, std::move(entry));
        } catch (const std::exception& e) {
            spdlog::error("session {} not restored: {}", id, e.what());
        }
    }
    spdlog::info("service ready: {} POIs, index {}, {} sessions restored", catalog_.size(), index_status_,
                 sessions_.size());
}

Service::~Service() = default;

const dialogue::StringTable& Service::strings(const std::string& language) const {
    return resources_.text(language);
}

planner::PlannerOptions Service::planner_options() const {
    planner::PlannerOptions o;
    o.day_start = config_.day_start;
    o.day_end = config_.day_end;
    o.iteration_cap = config_.iteration_cap;
    o.perturbation_rounds = config_.perturbation_rounds;
    o.similar_bonus = config_.similar_bonus;
    return o;
}

std::vector<catalog::Poi> Service::candidates(const planner::TripRequest& request,
                                              const std::set<std::string>& drops) const {
    const auto options = planner_options();
    std::vector<std::pair<planner::PoiScore, catalog::Poi>> ranked;
    for (auto& p : catalog_.find_pois(request.destination, {}, catalog_.size())) {
        if (!drops.contains(p.id)) {
            ranked.emplace_back(planner::score_poi(p, request, options), std::move(p));
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first.eligible != b.first.eligible) {
            return a.first.eligible;
        }
        return a.first.score > b.first.score;
    });
    std::vector<catalog::Poi> out;
    for (auto& [score, poi] : ranked) {
        if (out.size() == config_.max_candidates) {
            break;
        }
        out.push_back(std::move(poi));
    }
    return out;
}

std::set<std::string> Service::similar_tags(const planner::TripRequest& request) const {
    std::set<std::string> tags;
    if (config_.similar_bonus <= 0.0) {
        return tags;
    }
    std::lock_guard lock(closed_mutex_);
    for (const auto& profile : dialogue::similar_profiles(request, closed_, 3)) {
        if (profile.similarity <= 0.0) {
            continue;
        }
        const auto it = std::find_if(closed_.begin(), closed_.end(),
                                     [&](const auto& s) { return s.session_id == profile.session_id; });
        for (const auto& f : it->feedback) {
            const bool liked = f.verdict == dialogue::Verdict::accept ||
                               (f.verdict == dialogue::Verdict::rating && f.rating >= 4);
            if (!liked || f.target.starts_with("day:")) {
                continue;
            }
            if (auto poi = catalog_.get(f.target)) {
                tags.insert(poi->category_tags.begin(), poi->category_tags.end());
            }
        }
    }
    return tags;
}

void Service::remember_closed(const dialogue::SessionState& state) {
    std::lock_guard lock(closed_mutex_);
    closed_.push_back(state);
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw NotFoundError("unknown session '" + id + "'");
    }
    return it->second;
}

CreatedSession Service::create_session(const std::string& language) {
    if (std::find(llm::kLanguages.begin(), llm::kLanguages.end(), language) == llm::kLanguages.end()) {
        throw ValidationError("language", "unsupported language '" + language + "'");
    }
    dialogue::DialogueContext ctx{resources_, catalog_, *clock_};
    std::vector<dialogue::Event> events;
    auto entry = std::make_shared<Entry>();
    const auto id = store_->new_id();
    entry->state = dialogue::create_session(id, language, ctx, &events);
    store_->append(entry->state, events);
    CreatedSession out{id, dialogue::next_prompt(entry->state, ctx)};
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(id, std::move(entry));
    return out;
}

MessageReply Service::post_message(const std::string& session_id, const std::string& text) {
    const auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    if (entry->state.phase == Phase::closed) {
        throw TerminalStateError("session '" + session_id + "' is closed");
    }
    dialogue::DialogueContext ctx{resources_, catalog_, *clock_, config_.extraction_fallback ? chat_.get() : nullptr};
    Runner runner(*this);
    auto working = entry->state;
    const auto result = dialogue::apply_message(working, text, ctx, runner);
    store_->append(working, result.events);
    entry->state = std::move(working);

    MessageReply out;
    out.reply = result.reply;
    out.phase = entry->state.phase;
    out.itinerary = entry->state.current_itinerary;
    if (out.phase == Phase::closed) {
        remember_closed(entry->state);
    } else {
        out.prompt = dialogue::next_prompt(entry->state, ctx);
    }
    return out;
}

void Service::add_feedback(const std::string& session_id, dialogue::FeedbackEvent event) {
    const auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    if (entry->state.phase == Phase::closed) {
        throw TerminalStateError("session '" + session_id + "' is closed");
    }
    if (event.ts == 0) {
        event.ts = clock_->now_ms();
    }
    auto working = entry->state;
    const auto events = dialogue::record_feedback(working, std::move(event));
    store_->append(working, events);
    entry->state = std::move(working);
}

dialogue::SessionState Service::state(const std::string& session_id) const {
    const auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    return entry->state;
}

planner::Itinerary Service::itinerary(const std::string& session_id) const {
    auto s = state(session_id);
    if (!s.current_itinerary) {
        throw NotFoundError("session '" + session_id + "' has no itinerary yet");
    }
    return std::move(*s.current_itinerary);
}

std::string Service::export_markdown(const std::string& session_id) const {
    const auto s = state(session_id);
    return render_markdown(s, strings(s.language));
}

std::string Service::export_html(const std::string& session_id) const {
    const auto s = state(session_id);
    return render_html(s, strings(s.language));
}

std::optional<dialogue::PromptSpec> Service::prompt(const std::string& session_id) const {
    const auto s = state(session_id);
    if (s.phase == Phase::closed) {
        return std::nullopt;
    }
    dialogue::DialogueContext ctx{resources_, catalog_, *clock_};
    return dialogue::next_prompt(s, ctx);
}

nlohmann::json Service::health() const {
    std::size_t count = 0;
    {
        std::shared_lock lock(sessions_mutex_);
        count = sessions_.size();
    }
    return {{"status", "ok"},
            {"components",
             {{"catalog", {{"status", catalog_.size() > 0 ? "loaded" : "empty"},
                           {"size", catalog_.size()},
                           {"destinations", catalog_.destinations()}}},
              {"index", {{"status", index_status_}, {"chunks", index_ ? index_->size() : 0}}},
              {"chat", {{"provider", chat_->name()}, {"configured", chat_configured_}}},
              {"embedder", {{"provider", config_.embed_provider}, {"configured", embed_configured_},
                            {"dim", embedder_->dim()}}},
              {"sessions", {{"count", count}}}}}};
}

std::vector<std::string> Service::session_ids() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, entry] : sessions_) {
        out.push_back(id);
    }
    return out;
}

}  // namespace itinera::api
