#pragma once

#include "itinera/catalog/catalog.hpp"
#include "itinera/common/clock.hpp"
#include "itinera/common/dates.hpp"
#include "itinera/dialogue/extract.hpp"
#include "itinera/dialogue/lexicon.hpp"
#include "itinera/dialogue/slots.hpp"
#include "itinera/llm/chat.hpp"
#include "itinera/planner/itinerary.hpp"
#include "itinera/planner/trip_request.hpp"

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace itinera::dialogue {

enum class Phase { collecting, proposing, refining, closed };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

struct TranscriptEntry {
    std::string role;  // "user" | "assistant"
    std::string text;
    std::int64_t ts = 0;

    friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

enum class Verdict { accept, reject, rating };

struct FeedbackEvent {
    std::string target;  // poi id, or "day:<index>"
    Verdict verdict = Verdict::accept;
    int rating = 0;      // 1..5 when verdict == rating
    std::int64_t ts = 0;

    friend bool operator==(const FeedbackEvent&, const FeedbackEvent&) = default;
};

void validate(const FeedbackEvent& e);

struct SessionState {
    std::string session_id;
    std::string language;
    Date reference_date{};  // resolves dates given without a year, and bare "3 nights"
    std::int64_t created_ms = 0;
    Phase phase = Phase::collecting;
    SlotUpdate collected;  // the partially filled TripRequest
    Slot pending_slot = Slot::destination;
    std::vector<TranscriptEntry> transcript;
    std::optional<planner::Itinerary> current_itinerary;
    std::string narration;
    std::set<std::string> locks;
    std::set<std::string> drops;
    std::vector<FeedbackEvent> feedback;
    std::size_t event_count = 0;

    bool filled(Slot s) const;
    /// First unfilled slot in asking order, or Slot::none.
    Slot first_unfilled() const;
    /// Complete request; throws ValidationError while slots are missing.
    planner::TripRequest request() const;

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

void to_json(nlohmann::json& j, const SessionState& s);
void from_json(const nlohmann::json& j, SessionState& s);
void to_json(nlohmann::json& j, const FeedbackEvent& e);
void from_json(const nlohmann::json& j, FeedbackEvent& e);

/// Every state change is an event; replaying a session's events rebuilds it exactly.
using Event = nlohmann::json;

void apply_event(SessionState& s, const Event& e);

struct PromptSpec {
    std::string question;
    Slot expected_slot = Slot::none;
    std::vector<std::string> quick_replies;
};

enum class ActionKind { plan, answer, export_document };

std::string_view to_string(ActionKind k);

struct Action {
    ActionKind kind = ActionKind::plan;
    std::string text;  // the question, for answer
};

struct ActionOutcome {
    std::vector<Event> events;
    std::string reply;
};

/// Executes planner, narration, retrieval and export work on behalf of the state machine.
class ActionRunner {
public:
    virtual ~ActionRunner() = default;
    virtual ActionOutcome run(const Action& action, const SessionState& state) = 0;
};

struct DialogueResources {
    std::map<std::string, StringTable> strings;
    Lexicon lexicon;

    const StringTable& text(const std::string& language) const;
};

/// Loads "strings/" and "lexicon/" under `data_dir`.
DialogueResources load_dialogue_resources(const std::filesystem::path& data_dir);

struct DialogueContext {
    const DialogueResources& resources;
    const catalog::Catalog& catalog;
    Clock& clock;
    llm::ChatProvider* extraction_fallback = nullptr;  // consulted when the rules find nothing
};

struct ApplyResult {
    std::vector<Event> events;
    std::vector<Action> actions;
    std::string reply;
};

/// Throws ValidationError for a language other than it/en.
SessionState create_session(const std::string& session_id, const std::string& language, DialogueContext& ctx,
                            std::vector<Event>* events = nullptr);

/// Throws TerminalStateError on a Closed session.
PromptSpec next_prompt(const SessionState& state, const DialogueContext& ctx);

/// Appends the user message and the assistant reply (exactly two transcript entries).
/// Throws TerminalStateError on a Closed session.
ApplyResult apply_message(SessionState& state, const std::string& message, DialogueContext& ctx, ActionRunner& runner);

/// Throws ValidationError for a bad rating or while slots are still being collected.
std::vector<Event> record_feedback(SessionState& state, FeedbackEvent event);

/// Merges an update into collected slots. Returns false (and leaves dates alone) when the dates contradict.
bool merge_update(SlotUpdate& collected, const SlotUpdate& update, Date reference);

struct PoiMention {
    std::size_t position = 0;
    std::size_t length = 0;
    std::string poi_id;
};

/// Places named in the message. `planned` ids win ties; a lone kind word ("il museo") matches only
/// when exactly one planned place carries it.
std::vector<PoiMention> match_pois(const std::vector<Token>& tokens, const std::vector<catalog::Poi>& places,
                                   const std::set<std::string>& planned, const Lexicon& lexicon);

struct SimilarProfile {
    std::string session_id;
    double similarity = 0.0;
};

/// Cosine over preference weights (union of tags, missing = 0); Closed sessions only; ties by session id.
std::vector<SimilarProfile> similar_profiles(const planner::TripRequest& request, const std::vector<SessionState>& sessions,
                                             std::size_t k);

}  // namespace itinera::dialogue
