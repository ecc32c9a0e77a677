#include "itinera/retrieval/prompt.hpp"

#include "itinera/common/text.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace itinera::retrieval {

namespace {

constexpr const char* kDayNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

std::string intervals(const std::vector<catalog::TimeInterval>& day) {
    std::vector<std::string> parts;
    for (const auto& iv : day) {
        parts.push_back(text::format_clock(iv.open) + "-" + text::format_clock(iv.close));
    }
    return text::join(parts, " ");
}

std::string hours_summary(const catalog::OpeningHours& hours) {
    bool uniform = true;
    for (int d = 1; d < 7; ++d) {
        if (!(hours.on(d) == hours.on(0))) {
            uniform = false;
        }
    }
    if (uniform) {
        return hours.on(0).empty() ? "closed" : "daily " + intervals(hours.on(0));
    }
    std::vector<std::string> parts;
    for (int d = 0; d < 7; ++d) {
        parts.push_back(fmt::format("{} {}", kDayNames[d], hours.on(d).empty() ? "closed" : intervals(hours.on(d))));
    }
    return text::join(parts, ", ");
}

}  // namespace

std::size_t count_tokens(std::string_view s) {
    return text::split_whitespace(s).size();
}

std::string poi_fact(const catalog::Poi& poi) {
    const std::vector<std::string> tags(poi.category_tags.begin(), poi.category_tags.end());
    return fmt::format("- {} [{}] in {}: {}; open {}; visit {} min; {:.2f} EUR per person. {}", poi.name, poi.id,
                       poi.destination, text::join(tags, ", "), hours_summary(poi.hours), poi.visit_duration,
                       poi.cost_per_person, text::normalize_whitespace(poi.description));
}

AugmentedPrompt augment_prompt(const std::string& preamble, const std::string& question,
                               std::vector<RetrievalHit> hits, const std::vector<catalog::Poi>& live_pois,
                               std::size_t budget_tokens) {
    std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.chunk_id < b.chunk_id;
    });
    AugmentedPrompt out;
    std::vector<std::string> blocks;
    bool full = false;
    for (const auto& hit : hits) {
        const auto uri = hit.metadata.contains("uri") ? hit.metadata.at("uri") : hit.chunk_id;
        auto block = fmt::format("[{}] (source: {}) {}", blocks.size() + 1, uri, text::normalize_whitespace(hit.text));
        const auto tokens = count_tokens(block);
        if (out.block_tokens + tokens > budget_tokens) {
            full = true;
            break;
        }
        out.block_tokens += tokens;
        out.chunk_ids.push_back(hit.chunk_id);
        blocks.push_back(std::move(block));
    }
    std::vector<std::string> facts;
    for (const auto& poi : live_pois) {
        if (full) {
            break;
        }
        auto fact = poi_fact(poi);
        const auto tokens = count_tokens(fact);
        if (out.block_tokens + tokens > budget_tokens) {
            break;
        }
        out.block_tokens += tokens;
        out.poi_ids.push_back(poi.id);
        facts.push_back(std::move(fact));
    }

    std::string& t = out.text;
    t = preamble;
    if (!blocks.empty()) {
        t += "\n\nContext:\n" + text::join(blocks, "\n");
    }
    if (!facts.empty()) {
        t += "\n\nPoints of interest:\n" + text::join(facts, "\n");
    }
    t += "\n\nQuestion: " + question + "\n";
    return out;
}

}  // namespace itinera::retrieval
