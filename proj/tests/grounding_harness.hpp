#pragma once

#include "itinera/catalog/poi.hpp"
#include "itinera/common/text.hpp"
#include "itinera/llm/chat.hpp"
#include "itinera/llm/narration.hpp"
#include "itinera/llm/persona.hpp"
#include "itinera/planner/itinerary.hpp"

#include <random>
#include <string>
#include <vector>

namespace itinera::testing {

struct NarrationSample {
    planner::Itinerary itinerary;
    std::string language;
    std::string text;
    std::set<std::string> allowed;
};

/// A random itinerary over catalog POIs (times are illustrative) narrated by the mock or the template.
inline NarrationSample sample_narration(std::mt19937_64& rng, const std::vector<catalog::Poi>& pois,
                                        const llm::PersonaProfile& persona) {
    NarrationSample s;
    s.language = rng() % 2 == 0 ? "it" : "en";
    std::vector<catalog::Poi> shuffled = pois;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const int days = 1 + static_cast<int>(rng() % 3);
    std::size_t next = 0;
    for (int d = 0; d < days; ++d) {
        planner::DaySchedule day;
        day.date = *make_date(2025, 6, 2 + d);
        int t = 540;
        for (int k = 1 + static_cast<int>(rng() % 4); k > 0 && next < shuffled.size(); --k, ++next) {
            const auto& p = shuffled[next];
            day.visits.push_back(planner::Visit{p.id, p.name, t, t + p.visit_duration, p.cost_per_person, 1.0});
            t += p.visit_duration + 15;
        }
        s.itinerary.days.push_back(std::move(day));
    }
    s.itinerary.totals = planner::recompute_totals(s.itinerary);
    s.allowed = llm::allowed_entities(s.itinerary, pois, persona);
    if (rng() % 2 == 0) {
        s.text = llm::template_narration(s.itinerary, persona, s.language);
    } else {
        llm::MockChatProvider mock(llm::MockOptions{rng(), {}, {}, false});
        s.text = llm::narrate_itinerary(s.itinerary, pois, persona, s.language, mock).text;
    }
    return s;
}

/// A plausible POI name that does not exist in the catalog.
inline std::string fabricated_name(std::mt19937_64& rng, const std::vector<catalog::Poi>& pois) {
    const std::vector<std::string> kinds = {"Museo", "Castello", "Chiesa di San", "Palazzo", "Torre", "Villa", "Parco",
                                            "Osteria", "Trattoria", "Teatro", "Fontana", "Borgo", "Galleria",
                                            "Santuario di Santa", "Piazza", "Museo del", "Cantina"};
    const std::vector<std::string> syllables = {"va", "lo", "ren", "ti", "ca", "mo", "ne", "zo", "bri", "gan",
                                                "fer", "ul", "sto", "pe", "dri", "na", "qui", "vel"};
    for (;;) {
        std::string word;
        for (int k = 2 + static_cast<int>(rng() % 2); k > 0; --k) {
            word += syllables[rng() % syllables.size()];
        }
        word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        const auto folded = text::fold(word);
        bool clash = false;
        for (const auto& p : pois) {
            for (const auto& w : text::words(p.name + " " + p.destination)) {
                clash = clash || text::edit_distance(w, folded) <= 1;
            }
        }
        if (!clash) {
            return kinds[rng() % kinds.size()] + " " + word;
        }
    }
}

/// Inserts `fake` once: as a new sentence, inside a day line, or in place of a planned name.
inline std::string inject(std::mt19937_64& rng, const NarrationSample& s, const std::string& fake) {
    const bool it = s.language == "it";
    std::string out = s.text;
    switch (rng() % 4) {
        case 0: return out + (it ? "\nNon perdere " : "\nDo not miss ") + fake + "!";
        case 1: return fake + (it ? " ti aspetta. " : " is waiting for you. ") + out;
        case 2: {
            const auto pos = out.find(". ");
            const auto at = pos == std::string::npos ? out.size() : pos + 2;
            return out.insert(at, (it ? "Passa anche da " : "Also stop by ") + fake + ". ");
        }
        default: {
            for (const auto& day : s.itinerary.days) {
                for (const auto& v : day.visits) {
                    const auto pos = out.find(v.poi_name);
                    if (pos != std::string::npos) {
                        return out.replace(pos, v.poi_name.size(), fake);
                    }
                }
            }
            return out + " " + fake + ".";
        }
    }
}

}  // namespace itinera::testing
