#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace itinera::dialogue {

/// "key = value" lines in file order; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> load_key_values(const std::filesystem::path& path);

/// Localized text keyed by id, with {placeholder} substitution.
class StringTable {
public:
    StringTable() = default;
    explicit StringTable(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

    /// Throws ValidationError on an unknown key.
    std::string get(const std::string& key, const std::map<std::string, std::string>& vars = {}) const;
    bool has(const std::string& key) const { return entries_.contains(key); }
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

StringTable load_strings(const std::filesystem::path& path);

/// A folded word sequence and the canonical value it stands for.
struct Phrase {
    std::vector<std::string> words;
    std::string value;
};

/// Phrase tables, longest phrases first so "frutti di mare" wins over "mare".
struct Lexicon {
    std::vector<Phrase> tags;
    std::vector<Phrase> restrictions;
    std::vector<Phrase> allergens;
    std::vector<Phrase> pace;
    std::vector<Phrase> intents;
    std::vector<Phrase> numbers;
    std::vector<Phrase> months;
    std::vector<Phrase> markers;  // extractor grammar words, value = role
    std::set<std::string> place_articles;
    std::set<std::string> place_kinds;
    std::set<std::string> place_qualifiers;
};

/// Reads every phrase table from `dir`.
Lexicon load_lexicon(const std::filesystem::path& dir);

/// Every match of `table` in `words` as (start index, phrase); overlapping shorter matches are skipped.
std::vector<std::pair<std::size_t, const Phrase*>> find_phrases(const std::vector<std::string>& words,
                                                                const std::vector<Phrase>& table);

/// All languages' string tables under `dir` ("it.txt", "en.txt").
std::map<std::string, StringTable> load_string_tables(const std::filesystem::path& dir);

}  // namespace itinera::dialogue
