#pragma once

#include "itinera/catalog/poi.hpp"
#include "itinera/dialogue/slots.hpp"
#include "itinera/llm/chat.hpp"
#include "itinera/llm/grounding.hpp"
#include "itinera/llm/persona.hpp"
#include "itinera/planner/itinerary.hpp"

#include <set>
#include <string>
#include <vector>

namespace itinera::llm {

enum class NarrationSource { model, corrected, template_text };

std::string_view to_string(NarrationSource s);

struct NarrationResult {
    std::string text;
    NarrationSource source = NarrationSource::template_text;
    int model_calls = 0;
    GroundingReport report;  // of the returned text
    bool degraded = false;   // the provider failed
};

struct NarrationOptions {
    double temperature = 0.7;
    int max_tokens = 800;
};

/// Deterministic narration straight from the persona templates.
std::string template_narration(const planner::Itinerary& itinerary, const PersonaProfile& persona,
                               const std::string& language);

/// The facts block handed to the model: one line per visit, nothing beyond itinerary and catalog data.
std::string itinerary_facts(const planner::Itinerary& itinerary, const std::vector<catalog::Poi>& pois);

/// Names the narration may mention: planned POIs, their destinations, the persona.
std::set<std::string> allowed_entities(const planner::Itinerary& itinerary, const std::vector<catalog::Poi>& pois,
                                       const PersonaProfile& persona);

/// Model narration checked by verify_grounding; one corrective retry, then the template.
NarrationResult narrate_itinerary(const planner::Itinerary& itinerary, const std::vector<catalog::Poi>& pois,
                                  const PersonaProfile& persona, const std::string& language, ChatProvider& provider,
                                  const NarrationOptions& options = {});

/// Asks the model for a strict JSON slot update. Anything unparseable or invalid yields an empty update.
dialogue::SlotUpdate extract_structured(const std::string& message, const std::string& schema_hint,
                                        const std::string& language, ChatProvider& provider);

}  // namespace itinera::llm
