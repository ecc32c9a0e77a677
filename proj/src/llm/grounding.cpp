#include "itinera/llm/grounding.hpp"

#include "itinera/common/text.hpp"

#include <algorithm>
#include <optional>
#include <unordered_set>

namespace itinera::llm {

namespace {

const std::unordered_set<std::string> kConnectors = {
    "di", "del", "dello", "della", "dei", "degli", "delle", "da", "dal", "dalla", "d", "de", "e", "ed",
    "il", "la", "le", "lo", "in", "a", "al", "alla", "sul", "sulla", "of", "the", "and", "on", "at"};

// Folded words that are capitalized for grammar, not because they name something.
const std::unordered_set<std::string> kStopwords = {
    // it
    "giorno", "giornata", "poi", "infine", "ecco", "allora", "senti", "ascolta", "ciao", "buongiorno", "buonasera",
    "buon", "buona", "viaggio", "pranzo", "cena", "colazione", "mattina", "pomeriggio", "sera", "per", "un", "una",
    "uno", "i", "gli", "ma", "se", "non", "dopo", "prima", "inizia", "si", "totale", "costo", "note", "nota", "orario",
    "ora", "ore", "tesoro", "cara", "caro", "zia", "benvenuto", "benvenuta", "grazie", "prego", "perfetto", "bene",
    "domanda", "risposta", "fonte", "luoghi", "itinerario", "programma", "oggi", "domani", "alle", "con", "questo",
    "questa", "qui", "li", "la", "le", "il", "lo", "lunedi", "martedi", "mercoledi", "giovedi", "venerdi", "sabato",
    "domenica", "gennaio", "febbraio", "marzo", "aprile", "maggio", "giugno", "luglio", "agosto", "settembre",
    "ottobre", "novembre", "dicembre", "euro", "eur",
    // en
    "day", "then", "finally", "here", "hello", "hi", "well", "listen", "so", "enjoy", "your", "trip", "lunch",
    "dinner", "breakfast", "morning", "afternoon", "evening", "total", "cost", "budget", "notes", "note", "the", "a",
    "an", "and", "but", "if", "start", "after", "before", "dear", "auntie", "welcome", "thanks", "thank", "great",
    "question", "answer", "source", "places", "itinerary", "plan", "today", "tomorrow", "at", "with", "this", "there",
    "you", "we", "i", "my", "do", "not", "have", "monday", "tuesday", "wednesday", "thursday", "friday",
    "saturday", "sunday", "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december"};

struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string key;  // folded, alphanumeric only
    bool capitalized = false;
    bool sentence_start = false;
    bool joined_to_previous = false;  // only spaces since the previous token
};

std::size_t cp_length(unsigned char lead) {
    if (lead < 0x80) {
        return 1;
    }
    if ((lead & 0xE0) == 0xC0) {
        return 2;
    }
    if ((lead & 0xF0) == 0xE0) {
        return 3;
    }
    return 4;
}

bool is_word_cp(char32_t cp) {
    if (cp < 0x80) {
        return std::isalnum(static_cast<int>(cp)) != 0;
    }
    if (cp == 0xD7 || cp == 0xF7) {
        return false;
    }
    return (cp >= 0xC0 && cp < 0x2000) || cp >= 0x3040;
}

bool is_apostrophe(char32_t cp) {
    return cp == '\'' || cp == 0x2019;
}

/// Letters and digits of the folded word, apostrophes and hyphens turned into spaces.
std::string normalize(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : text::fold(s)) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            if (space && !out.empty()) {
                out += ' ';
            }
            space = false;
            out += c;
        } else {
            space = true;
        }
    }
    return out;
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    bool sentence_start = true;
    bool only_spaces = true;
    while (i < s.size()) {
        const auto len = cp_length(static_cast<unsigned char>(s[i]));
        const auto cps = text::decode_utf8(s.substr(i, len));
        const char32_t cp = cps.empty() ? 0 : cps.front();
        if (!is_word_cp(cp)) {
            if (cp == '.' || cp == '!' || cp == '?' || cp == ':' || cp == ';' || cp == '\n' || cp == 0x2026) {
                sentence_start = true;
            }
            if (cp != ' ') {
                only_spaces = false;
            }
            i += len;
            continue;
        }
        Token t;
        t.begin = i;
        t.sentence_start = sentence_start;
        t.joined_to_previous = only_spaces && !tokens.empty();
        std::size_t j = i;
        while (j < s.size()) {
            const auto l = cp_length(static_cast<unsigned char>(s[j]));
            const auto c = text::decode_utf8(s.substr(j, l));
            const char32_t x = c.empty() ? 0 : c.front();
            if (is_word_cp(x)) {
                j += l;
                continue;
            }
            // Apostrophes and hyphens stay inside a word when a letter follows.
            if ((is_apostrophe(x) || x == '-') && j + l < s.size()) {
                const auto nl = cp_length(static_cast<unsigned char>(s[j + l]));
                const auto n = text::decode_utf8(s.substr(j + l, nl));
                if (!n.empty() && is_word_cp(n.front())) {
                    j += l;
                    continue;
                }
            }
            break;
        }
        t.end = j;
        const auto word = s.substr(t.begin, t.end - t.begin);
        t.capitalized = text::starts_with_upper(word);
        t.key = normalize(word);
        tokens.push_back(std::move(t));
        sentence_start = false;
        only_spaces = true;
        i = j;
    }
    return tokens;
}

bool is_digit_token(const Token& t) {
    return !t.key.empty() && std::isdigit(static_cast<unsigned char>(t.key[0]));
}

/// Runs of capitalized tokens, bridged by connectors, within one clause.
std::vector<std::pair<std::size_t, std::size_t>> find_runs(const std::vector<Token>& tokens) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (!tokens[i].capitalized) {
            ++i;
            continue;
        }
        std::size_t last = i;
        std::size_t j = i + 1;
        while (j < tokens.size() && tokens[j].joined_to_previous && !tokens[j].sentence_start) {
            if (tokens[j].capitalized) {
                last = j;
            } else if (!kConnectors.contains(tokens[j].key) || is_digit_token(tokens[j])) {
                break;
            }
            ++j;
        }
        runs.emplace_back(i, last + 1);
        i = last + 1;
    }
    return runs;
}

struct Allowed {
    std::vector<std::vector<std::string>> names;  // normalized words per entity
    std::vector<std::string> full;
};

Allowed prepare(const std::set<std::string>& entities) {
    Allowed a;
    for (const auto& e : entities) {
        auto n = normalize(e);
        if (n.empty()) {
            continue;
        }
        a.names.push_back(text::split_whitespace(n));
        a.full.push_back(std::move(n));
    }
    return a;
}

bool near(const std::string& a, const std::string& b) {
    if (a == b) {
        return true;
    }
    // Single short words must match exactly, or one typo would ground half the dictionary.
    if (a.size() < 4 || b.size() < 4) {
        return false;
    }
    return text::edit_distance(a, b) <= 1;
}

bool matches(const Allowed& allowed, const std::string& phrase, std::size_t words) {
    for (std::size_t e = 0; e < allowed.names.size(); ++e) {
        if (near(phrase, allowed.full[e])) {
            return true;
        }
        const auto& name = allowed.names[e];
        for (std::size_t s = 0; s + words <= name.size(); ++s) {
            std::string sub;
            for (std::size_t k = s; k < s + words; ++k) {
                sub += (k == s ? "" : " ") + name[k];
            }
            if (near(phrase, sub)) {
                return true;
            }
        }
    }
    return false;
}

std::string phrase_of(const std::vector<Token>& tokens, std::size_t b, std::size_t e, std::size_t* words) {
    std::string out;
    *words = 0;
    for (std::size_t k = b; k < e; ++k) {
        for (const auto& w : text::split_whitespace(tokens[k].key)) {
            out += (out.empty() ? "" : " ") + w;
            ++*words;
        }
    }
    return out;
}

/// Checks tokens [b, e). Returns true when every significant token is covered by a match.
bool grounded(const std::vector<Token>& tokens, std::size_t b, std::size_t e, const Allowed& allowed) {
    std::size_t words = 0;
    if (matches(allowed, phrase_of(tokens, b, e, &words), words)) {
        return true;
    }
    std::size_t i = b;
    while (i < e) {
        std::optional<std::size_t> end;
        for (std::size_t j = e; j > i; --j) {
            if (matches(allowed, phrase_of(tokens, i, j, &words), words)) {
                end = j;
                break;
            }
        }
        if (end) {
            i = *end;
            continue;
        }
        const auto& t = tokens[i];
        const bool lone_opener = i == b && t.sentence_start;
        if (kConnectors.contains(t.key) || kStopwords.contains(t.key) || is_digit_token(t) || lone_opener ||
            !t.capitalized) {
            ++i;
            continue;
        }
        return false;
    }
    return true;
}

struct Span {
    std::size_t begin;
    std::size_t end;  // token indices
};

/// Quoted spans (straight, curly or guillemets) as token ranges.
std::vector<Span> quoted_spans(std::string_view s, const std::vector<Token>& tokens) {
    std::vector<Span> spans;
    const std::pair<std::string_view, std::string_view> quotes[] = {
        {"\"", "\""}, {"“", "”"}, {"«", "»"}};
    for (const auto& [open, close] : quotes) {
        std::size_t pos = 0;
        while ((pos = s.find(open, pos)) != std::string_view::npos) {
            const auto stop = s.find(close, pos + open.size());
            if (stop == std::string_view::npos || stop - pos > 120) {
                break;
            }
            Span sp{tokens.size(), tokens.size()};
            for (std::size_t k = 0; k < tokens.size(); ++k) {
                if (tokens[k].begin > pos && tokens[k].end <= stop) {
                    sp.begin = std::min(sp.begin, k);
                    sp.end = k + 1;
                }
            }
            const bool has_capital = sp.begin < sp.end &&
                                     std::any_of(tokens.begin() + static_cast<std::ptrdiff_t>(sp.begin),
                                                 tokens.begin() + static_cast<std::ptrdiff_t>(sp.end),
                                                 [](const Token& t) { return t.capitalized; });
            if (has_capital) {
                spans.push_back(sp);
            }
            pos = stop + close.size();
        }
    }
    return spans;
}

std::vector<Span> mention_spans(std::string_view s, const std::vector<Token>& tokens) {
    auto spans = quoted_spans(s, tokens);
    std::vector<bool> in_quote(tokens.size(), false);
    for (const auto& sp : spans) {
        for (std::size_t k = sp.begin; k < sp.end; ++k) {
            in_quote[k] = true;
        }
    }
    for (const auto& [b, e] : find_runs(tokens)) {
        bool overlaps = false;
        for (std::size_t k = b; k < e; ++k) {
            overlaps = overlaps || in_quote[k];
        }
        if (!overlaps) {
            spans.push_back(Span{b, e});
        }
    }
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    return spans;
}

Mention to_mention(std::string_view s, const std::vector<Token>& tokens, const Span& sp) {
    Mention m;
    m.offset = tokens[sp.begin].begin;
    m.length = tokens[sp.end - 1].end - m.offset;
    m.text = std::string(s.substr(m.offset, m.length));
    return m;
}

}  // namespace

std::vector<Mention> extract_mentions(std::string_view text) {
    const auto tokens = tokenize(text);
    std::vector<Mention> out;
    for (const auto& sp : mention_spans(text, tokens)) {
        out.push_back(to_mention(text, tokens, sp));
    }
    return out;
}

GroundingReport verify_grounding(std::string_view text, const std::set<std::string>& allowed_entities) {
    const auto tokens = tokenize(text);
    const auto allowed = prepare(allowed_entities);
    GroundingReport report;
    for (const auto& sp : mention_spans(text, tokens)) {
        // A run made only of common words (or a lone sentence opener) is not an entity.
        bool significant = false;
        for (std::size_t k = sp.begin; k < sp.end; ++k) {
            const auto& t = tokens[k];
            const bool lone_opener = k == sp.begin && t.sentence_start && sp.end - sp.begin == 1;
            if (t.capitalized && !kStopwords.contains(t.key) && !kConnectors.contains(t.key) && !lone_opener) {
                significant = true;
            }
        }
        if (!significant) {
            continue;
        }
        if (grounded(tokens, sp.begin, sp.end, allowed)) {
            ++report.grounded_count;
        } else {
            auto m = to_mention(text, tokens, sp);
            m.reason = "no allowed entity matches";
            report.ungrounded.push_back(std::move(m));
        }
    }
    return report;
}

}  // namespace itinera::llm
