#pragma once

#include "itinera/dialogue/lexicon.hpp"
#include "itinera/dialogue/session.hpp"

#include <string>

namespace itinera::api {

/// Markdown trip document: header, one table per day, totals, notes, narration.
/// Pure function of the session state, so repeated exports are byte-identical.
/// Throws NotFoundError when nothing has been planned yet.
std::string render_markdown(const dialogue::SessionState& state, const dialogue::StringTable& strings);

/// The same document as standalone HTML with print styles.
std::string render_html(const dialogue::SessionState& state, const dialogue::StringTable& strings);

}  // namespace itinera::api
