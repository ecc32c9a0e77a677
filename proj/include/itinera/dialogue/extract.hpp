#pragma once

#include "itinera/common/dates.hpp"
#include "itinera/dialogue/lexicon.hpp"
#include "itinera/dialogue/slots.hpp"

#include <string>
#include <vector>

namespace itinera::dialogue {

/// Word token of a message; punctuation that separates clauses becomes a "," token.
struct Token {
    std::string word;  // folded
    bool punct = false;
    bool digits = false;  // spelled with digits ("12", "1.500", "10/06")
    std::optional<double> number;
};

std::vector<Token> tokenize(const std::string& message, const Lexicon& lexicon);

/// Deterministic rule pass. `pending` only decides how a bare number is read.
/// Dates without a year resolve to their next occurrence on or after `reference`.
SlotUpdate extract_slots(const std::string& message, Slot pending, const Lexicon& lexicon,
                         const std::vector<std::string>& destinations, Date reference);

/// Same rules over already tokenized text; blanked tokens (empty word) are ignored.
SlotUpdate extract_slots(const std::vector<Token>& tokens, Slot pending, const Lexicon& lexicon,
                         const std::vector<std::string>& destinations, Date reference);

/// Destination names (from `destinations`) mentioned in the message, in order of appearance.
std::vector<std::string> find_destinations(const std::vector<Token>& tokens, const std::vector<std::string>& destinations);

}  // namespace itinera::dialogue
