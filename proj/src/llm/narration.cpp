#include "itinera/llm/narration.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"

#include <fmt/format.h>
#include <map>
#include <spdlog/spdlog.h>

namespace itinera::llm {

std::string_view to_string(NarrationSource s) {
    switch (s) {
        case NarrationSource::model: return "model";
        case NarrationSource::corrected: return "corrected";
        case NarrationSource::template_text: return "template";
    }
    return "template";
}

std::string template_narration(const planner::Itinerary& itinerary, const PersonaProfile& persona,
                               const std::string& language) {
    const auto& style = persona.style(language);
    if (itinerary.visit_count() == 0) {
        return style.no_plan;
    }
    std::string out = style.intro;
    for (std::size_t d = 0; d < itinerary.days.size(); ++d) {
        const auto& day = itinerary.days[d];
        out += "\n" + fill(style.day, {{"n", std::to_string(d + 1)}, {"date", format_iso_date(day.date)}}) + " ";
        if (day.visits.empty()) {
            out += style.empty_day;
            continue;
        }
        for (std::size_t i = 0; i < day.visits.size(); ++i) {
            const auto& v = day.visits[i];
            if (i > 0) {
                out += ", ";
            }
            out += fill(i == 0 ? style.first : style.next,
                        {{"time", text::format_clock(v.arrival)}, {"name", v.poi_name}});
        }
        out += ".";
    }
    out += "\n" + style.closing;
    return out;
}

std::string itinerary_facts(const planner::Itinerary& itinerary, const std::vector<catalog::Poi>& pois) {
    std::map<std::string, const catalog::Poi*> by_id;
    for (const auto& p : pois) {
        by_id.emplace(p.id, &p);
    }
    std::string out(kFactsMarker);
    for (std::size_t d = 0; d < itinerary.days.size(); ++d) {
        for (const auto& v : itinerary.days[d].visits) {
            std::string tags;
            if (const auto it = by_id.find(v.poi_id); it != by_id.end()) {
                tags = text::join(std::vector<std::string>(it->second->category_tags.begin(),
                                                           it->second->category_tags.end()),
                                  ", ");
            }
            out += fmt::format("\n- {} | {} | {}-{} | {} | {:.2f} EUR | {}", d + 1,
                               format_iso_date(itinerary.days[d].date), text::format_clock(v.arrival),
                               text::format_clock(v.departure), v.poi_name, v.cost_for_party, tags);
        }
    }
    out += fmt::format("\nTotal cost: {:.2f} EUR. Travel time: {} minutes.", itinerary.totals.cost,
                       itinerary.totals.travel_minutes);
    return out;
}

std::set<std::string> allowed_entities(const planner::Itinerary& itinerary, const std::vector<catalog::Poi>& pois,
                                       const PersonaProfile& persona) {
    std::set<std::string> names{persona.name};
    for (const auto& day : itinerary.days) {
        for (const auto& v : day.visits) {
            names.insert(v.poi_name);
        }
    }
    for (const auto& p : pois) {
        if (itinerary.contains(p.id) && !p.destination.empty()) {
            names.insert(p.destination);
        }
    }
    return names;
}

NarrationResult narrate_itinerary(const planner::Itinerary& itinerary, const std::vector<catalog::Poi>& pois,
                                  const PersonaProfile& persona, const std::string& language, ChatProvider& provider,
                                  const NarrationOptions& options) {
    const auto& style = persona.style(language);
    NarrationResult result;
    if (itinerary.visit_count() == 0) {
        result.text = style.no_plan;
        return result;
    }
    const auto allowed = allowed_entities(itinerary, pois, persona);
    CompletionRequest req;
    req.system = style.preamble;
    req.temperature = options.temperature;
    req.max_tokens = options.max_tokens;
    req.language = language;
    req.messages.push_back({"user", itinerary_facts(itinerary, pois) + "\n\n" +
                                        (language == "it" ? "Racconta questo itinerario giorno per giorno."
                                                          : "Describe this itinerary day by day.")});
    try {
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto text = provider.complete(req);
            ++result.model_calls;
            auto report = verify_grounding(text, allowed);
            if (report.ok()) {
                result.text = std::move(text);
                result.source = attempt == 0 ? NarrationSource::model : NarrationSource::corrected;
                result.report = std::move(report);
                return result;
            }
            std::vector<std::string> names;
            for (const auto& m : report.ungrounded) {
                names.push_back(m.text);
            }
            spdlog::info("narration mentions ungrounded entities: {}", text::join(names, "; "));
            req.messages.push_back({"assistant", text});
            req.messages.push_back({"user", fill(style.correction, {{"names", text::join(names, ", ")}})});
        }
    } catch (const ProviderError& e) {
        spdlog::warn("narration falls back to template: {}", e.what());
        result.degraded = true;
    }
    result.text = template_narration(itinerary, persona, language);
    result.source = NarrationSource::template_text;
    result.report = verify_grounding(result.text, allowed);
    return result;
}

dialogue::SlotUpdate extract_structured(const std::string& message, const std::string& schema_hint,
                                        const std::string& language, ChatProvider& provider) {
    CompletionRequest req;
    req.system = std::string(kExtractionMarker) +
                 " describing the trip details in the user's message, and nothing else. Allowed keys: "
                 "destination (string), start_date and end_date (YYYY-MM-DD), nights, adults, children (integers), "
                 "preferences (list of interest tags), budget_total (number, euro), restrictions (list), "
                 "pace (relaxed|normal|intense). Omit unknown keys. The question being answered is about: " +
                 schema_hint + ".";
    req.temperature = 0.0;
    req.max_tokens = 200;
    req.language = language;
    req.messages.push_back({"user", message});
    std::string reply;
    try {
        reply = provider.complete(req);
    } catch (const ProviderError& e) {
        spdlog::warn("structured extraction unavailable: {}", e.what());
        return {};
    }
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        spdlog::info("structured extraction returned no JSON object");
        return {};
    }
    try {
        auto update = nlohmann::json::parse(reply.substr(open, close - open + 1)).get<dialogue::SlotUpdate>();
        std::string why;
        if (!dialogue::is_valid(update, &why)) {
            spdlog::info("structured extraction rejected: {}", why);
            return {};
        }
        return update;
    } catch (const std::exception& e) {
        spdlog::info("structured extraction unparseable: {}", e.what());
        return {};
    }
}

}  // namespace itinera::llm
