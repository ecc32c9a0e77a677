#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itinera::ingest {

enum class ContentKind { html, plain_text, markdown };

struct ExtractedText {
    std::string title;
    std::string body;  // one paragraph per line, whitespace collapsed
};

/// Strips markup, scripts, styles and navigation chrome. Falls back to the first heading
/// and then `uri` for the title. Returns nullopt when nothing readable remains.
std::optional<ExtractedText> extract_text(std::string_view raw, ContentKind kind, const std::string& uri);

/// Decodes named and numeric character references.
std::string decode_entities(std::string_view s);

/// href targets of <a> elements, in document order, undecoded relative references included.
std::vector<std::string> extract_links(std::string_view html);

}  // namespace itinera::ingest
