#pragma once

#include "itinera/api/config.hpp"
#include "itinera/catalog/catalog.hpp"
#include "itinera/common/clock.hpp"
#include "itinera/dialogue/session.hpp"
#include "itinera/dialogue/store.hpp"
#include "itinera/llm/chat.hpp"
#include "itinera/llm/persona.hpp"
#include "itinera/planner/planner.hpp"
#include "itinera/retrieval/embedding.hpp"
#include "itinera/retrieval/vector_index.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace itinera::api {

/// Overrides for tests and tools; anything left empty is built from the config.
struct ServiceOptions {
    std::shared_ptr<Clock> clock;
    std::unique_ptr<llm::ChatProvider> chat;
    std::unique_ptr<retrieval::Embedder> embedder;
    std::function<std::string()> id_generator;
};

struct CreatedSession {
    std::string session_id;
    dialogue::PromptSpec prompt;
};

struct MessageReply {
    std::string reply;
    dialogue::Phase phase = dialogue::Phase::collecting;
    std::optional<planner::Itinerary> itinerary;
    std::optional<dialogue::PromptSpec> prompt;  // absent once Closed
};

/// Sessions, their persistence and the work behind dialogue actions. Calls for different
/// sessions run concurrently; calls for one session are serialized in arrival order.
class Service {
public:
    explicit Service(ApiConfig config, ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Throws ValidationError for a language other than it/en.
    CreatedSession create_session(const std::string& language);
    /// Throws NotFoundError (unknown id) or TerminalStateError (Closed).
    MessageReply post_message(const std::string& session_id, const std::string& text);
    void add_feedback(const std::string& session_id, dialogue::FeedbackEvent event);

    dialogue::SessionState state(const std::string& session_id) const;
    /// Throws NotFoundError before the first plan.
    planner::Itinerary itinerary(const std::string& session_id) const;
    std::string export_markdown(const std::string& session_id) const;
    std::string export_html(const std::string& session_id) const;
    std::optional<dialogue::PromptSpec> prompt(const std::string& session_id) const;

    nlohmann::json health() const;
    std::vector<std::string> session_ids() const;

    const ApiConfig& config() const { return config_; }
    const catalog::Catalog& catalog() const { return catalog_; }
    planner::PlannerOptions planner_options() const;
    /// POIs the planner sees for a request: the destination's catalog entries minus drops,
    /// best scoring first, capped at planner.max_candidates.
    std::vector<catalog::Poi> candidates(const planner::TripRequest& request,
                                         const std::set<std::string>& drops) const;
    /// Tags of places liked (accepted or rated 4+) in the three most similar Closed sessions.
    std::set<std::string> similar_tags(const planner::TripRequest& request) const;

private:
    class Runner;
    struct Entry {
        std::mutex mutex;
        dialogue::SessionState state;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    void remember_closed(const dialogue::SessionState& state);
    const dialogue::StringTable& strings(const std::string& language) const;

    ApiConfig config_;
    std::shared_ptr<Clock> clock_;
    catalog::Catalog catalog_;
    dialogue::DialogueResources resources_;
    llm::PersonaProfile persona_;
    std::unique_ptr<llm::ChatProvider> chat_;
    bool chat_configured_ = true;
    std::unique_ptr<retrieval::Embedder> embedder_;
    bool embed_configured_ = true;
    std::optional<retrieval::VectorIndex> index_;
    std::string index_status_;
    std::unique_ptr<dialogue::SessionStore> store_;

    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    mutable std::mutex closed_mutex_;
    std::vector<dialogue::SessionState> closed_;  // snapshot of Closed sessions for similar-profile lookups
};

nlohmann::json to_json(const dialogue::PromptSpec& p);

/// Embedder named by embed.*; `configured` is false when an HTTP provider has no API key.
std::unique_ptr<retrieval::Embedder> make_embedder(const ApiConfig& config, bool* configured = nullptr);

}  // namespace itinera::api
