#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace itinera::llm {

struct PersonaStyle {
    std::string preamble;
    std::string no_plan;
    std::string intro;
    std::string day;        // {n}, {date}
    std::string first;      // {time}, {name}
    std::string next;       // {time}, {name}
    std::string empty_day;
    std::string closing;
    std::string correction;  // {names}
};

struct PersonaProfile {
    std::string name;
    std::vector<std::string> tone;
    std::map<std::string, PersonaStyle> styles;  // by language

    /// Throws ValidationError for unsupported languages.
    const PersonaStyle& style(const std::string& language) const;
};

inline const std::vector<std::string> kLanguages = {"it", "en"};

/// Loads and validates a persona file; every supported language must have a complete style.
PersonaProfile load_persona(const std::filesystem::path& path);

/// Replaces each `{key}` in `pattern` with its value.
std::string fill(std::string pattern, const std::map<std::string, std::string>& values);

}  // namespace itinera::llm
