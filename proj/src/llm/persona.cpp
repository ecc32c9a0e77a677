#include "itinera/llm/persona.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"

#include <json.hpp>

namespace itinera::llm {

const PersonaStyle& PersonaProfile::style(const std::string& language) const {
    const auto it = styles.find(language);
    if (it == styles.end()) {
        throw ValidationError("language", "unsupported language '" + language + "'");
    }
    return it->second;
}

PersonaProfile load_persona(const std::filesystem::path& path) {
    const auto j = nlohmann::json::parse(files::read_all(path));
    PersonaProfile p;
    j.at("name").get_to(p.name);
    p.tone = j.value("tone", std::vector<std::string>{});
    if (p.name.empty()) {
        throw ValidationError("name", "persona needs a name");
    }
    for (const auto& lang : kLanguages) {
        if (!j.at("styles").contains(lang)) {
            throw ValidationError("styles", "missing style for " + lang);
        }
        const auto& s = j.at("styles").at(lang);
        PersonaStyle st;
        const std::pair<const char*, std::string*> fields[] = {
            {"preamble", &st.preamble}, {"no_plan", &st.no_plan}, {"intro", &st.intro},
            {"day", &st.day},           {"first", &st.first},     {"next", &st.next},
            {"empty_day", &st.empty_day}, {"closing", &st.closing}, {"correction", &st.correction}};
        for (const auto& [key, target] : fields) {
            if (!s.contains(key) || s.at(key).get<std::string>().empty()) {
                throw ValidationError("styles", std::string("missing '") + key + "' for " + lang);
            }
            s.at(key).get_to(*target);
        }
        p.styles.emplace(lang, std::move(st));
    }
    return p;
}

std::string fill(std::string pattern, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        const std::string token = "{" + key + "}";
        for (auto pos = pattern.find(token); pos != std::string::npos; pos = pattern.find(token, pos + value.size())) {
            pattern.replace(pos, token.size(), value);
        }
    }
    return pattern;
}

}  // namespace itinera::llm
