#include "itinera/dialogue/lexicon.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/text.hpp"
#include "itinera/llm/persona.hpp"

#include <algorithm>

namespace itinera::dialogue {

std::vector<std::pair<std::string, std::string>> load_key_values(const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    int line_no = 0;
    for (const auto& raw : text::split(files::read_all(path), '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || text::trim(line.substr(0, eq)).empty()) {
            throw ValidationError(path.filename().string(), "line " + std::to_string(line_no) + " is not key = value");
        }
        out.emplace_back(std::string(text::trim(line.substr(0, eq))), std::string(text::trim(line.substr(eq + 1))));
    }
    return out;
}

std::string StringTable::get(const std::string& key, const std::map<std::string, std::string>& vars) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ValidationError("strings", "missing key '" + key + "'");
    }
    return llm::fill(it->second, vars);
}

StringTable load_strings(const std::filesystem::path& path) {
    std::map<std::string, std::string> entries;
    for (auto& [k, v] : load_key_values(path)) {
        if (!entries.emplace(k, v).second) {
            throw ValidationError(path.filename().string(), "duplicate key '" + k + "'");
        }
    }
    return StringTable(std::move(entries));
}

std::map<std::string, StringTable> load_string_tables(const std::filesystem::path& dir) {
    std::map<std::string, StringTable> out;
    for (const auto& lang : llm::kLanguages) {
        out.emplace(lang, load_strings(dir / (std::string(lang) + ".txt")));
    }
    const auto& reference = out.begin()->second.entries();
    for (const auto& [lang, table] : out) {
        for (const auto& [key, _] : reference) {
            if (!table.has(key)) {
                throw ValidationError("strings", "'" + key + "' missing for " + lang);
            }
        }
        if (table.entries().size() != reference.size()) {
            throw ValidationError("strings", "tables for " + lang + " and " + out.begin()->first + " differ");
        }
    }
    return out;
}

namespace {

std::vector<Phrase> load_phrases(const std::filesystem::path& path) {
    std::vector<Phrase> out;
    for (const auto& [value, list] : load_key_values(path)) {
        for (const auto& p : text::split(list, ',')) {
            auto w = text::words(p);
            if (!w.empty()) {
                out.push_back(Phrase{std::move(w), value});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Phrase& a, const Phrase& b) { return a.words.size() > b.words.size(); });
    return out;
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& dir) {
    Lexicon lx;
    lx.tags = load_phrases(dir / "tags.txt");
    lx.restrictions = load_phrases(dir / "restrictions.txt");
    lx.allergens = load_phrases(dir / "allergens.txt");
    lx.pace = load_phrases(dir / "pace.txt");
    lx.intents = load_phrases(dir / "intents.txt");
    lx.numbers = load_phrases(dir / "numbers.txt");
    lx.months = load_phrases(dir / "months.txt");
    lx.markers = load_phrases(dir / "markers.txt");
    for (const auto& [key, list] : load_key_values(dir / "place_words.txt")) {
        auto& target = key == "articles" ? lx.place_articles : key == "kinds" ? lx.place_kinds : lx.place_qualifiers;
        for (const auto& w : text::words(list)) {
            target.insert(w);
        }
    }
    return lx;
}

std::vector<std::pair<std::size_t, const Phrase*>> find_phrases(const std::vector<std::string>& words,
                                                                const std::vector<Phrase>& table) {
    std::vector<std::pair<std::size_t, const Phrase*>> out;
    std::vector<bool> taken(words.size(), false);
    for (const auto& p : table) {
        if (p.words.size() > words.size()) {
            continue;
        }
        for (std::size_t i = 0; i + p.words.size() <= words.size(); ++i) {
            bool hit = true;
            for (std::size_t k = 0; k < p.words.size() && hit; ++k) {
                hit = !taken[i + k] && words[i + k] == p.words[k];
            }
            if (hit) {
                std::fill(taken.begin() + static_cast<long>(i), taken.begin() + static_cast<long>(i + p.words.size()), true);
                out.emplace_back(i, &p);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

}  // namespace itinera::dialogue
