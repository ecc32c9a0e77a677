#pragma once

#include "itinera/catalog/poi.hpp"
#include "itinera/retrieval/vector_index.hpp"

#include <string>
#include <vector>

namespace itinera::retrieval {

struct RetrievalSettings {
    std::size_t k = 6;
    std::size_t budget_tokens = 1200;
};

struct AugmentedPrompt {
    std::string text;
    std::vector<std::string> chunk_ids;  // included context blocks, in block order
    std::vector<std::string> poi_ids;
    std::size_t block_tokens = 0;  // tokens spent on context and POI blocks
};

/// Whitespace token count, the unit of the prompt budget.
std::size_t count_tokens(std::string_view text);

/// One line of POI facts as it appears in prompts.
std::string poi_fact(const catalog::Poi& poi);

/// Preamble, then context blocks in score order, then POI facts, then the question.
/// Blocks stop at the first one that would overflow the budget.
AugmentedPrompt augment_prompt(const std::string& preamble, const std::string& question,
                               std::vector<RetrievalHit> hits, const std::vector<catalog::Poi>& live_pois,
                               std::size_t budget_tokens);

}  // namespace itinera::retrieval
