#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace itinera::llm {

struct Mention {
    std::string text;
    std::size_t offset = 0;  // byte offset into the checked text
    std::size_t length = 0;
    std::string reason;
};

struct GroundingReport {
    std::vector<Mention> ungrounded;
    std::size_t grounded_count = 0;

    bool ok() const { return ungrounded.empty(); }
};

/// Entity-like spans: runs of capitalized words (joined by connectors such as "di", "del", "of")
/// and quoted spans that contain a capitalized word.
std::vector<Mention> extract_mentions(std::string_view text);

/// A mention is grounded when it, or each of its parts, matches an allowed name or a contiguous
/// word sequence of one after accent folding, within edit distance 1. Common sentence words and a
/// lone sentence-initial word are ignored.
GroundingReport verify_grounding(std::string_view text, const std::set<std::string>& allowed_entities);

}  // namespace itinera::llm
