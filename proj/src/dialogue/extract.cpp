#include "itinera/dialogue/extract.hpp"

#include "itinera/common/text.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

namespace itinera::dialogue {

namespace {

std::optional<double> parse_digits(const std::string& w) {
    static const std::regex thousands(R"(\d{1,3}([.,]\d{3})+)");
    static const std::regex decimal(R"(\d+([.,]\d{1,2})?)");
    static const std::regex kilo(R"((\d+)k)");
    std::smatch m;
    if (std::regex_match(w, thousands)) {
        std::string s;
        std::copy_if(w.begin(), w.end(), std::back_inserter(s), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        return std::stod(s);
    }
    if (std::regex_match(w, decimal)) {
        std::string s = w;
        std::replace(s.begin(), s.end(), ',', '.');
        return std::stod(s);
    }
    if (std::regex_match(w, m, kilo)) {
        return std::stod(m[1]) * 1000.0;
    }
    return std::nullopt;
}

// Per-token role assigned by the phrase tables; a token belongs to at most one phrase.
struct Marked {
    std::vector<Token> tok;
    std::vector<std::string> role;  // marker role at a phrase start
    std::vector<std::size_t> span;  // phrase length at its start
    std::vector<bool> covered;
    std::vector<bool> used;         // number already interpreted
};

std::vector<std::string> words_of(const std::vector<Token>& toks, const std::vector<bool>& covered) {
    std::vector<std::string> w;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        w.push_back(covered[i] || toks[i].punct ? std::string() : toks[i].word);
    }
    return w;
}

// Matches `table` on uncovered tokens and covers what it matched.
std::vector<std::pair<std::size_t, const Phrase*>> take(Marked& m, const std::vector<Phrase>& table) {
    auto hits = find_phrases(words_of(m.tok, m.covered), table);
    hits.erase(std::remove_if(hits.begin(), hits.end(), [](const auto& h) { return h.second->words.front().empty(); }),
               hits.end());
    for (const auto& [i, p] : hits) {
        for (std::size_t k = 0; k < p->words.size(); ++k) {
            m.covered[i + k] = true;
        }
    }
    return hits;
}

bool is(const Marked& m, std::size_t i, std::string_view role) {
    return i < m.role.size() && m.role[i] == role;
}

std::optional<int> month_at(const Marked& m, const Lexicon& lx, std::size_t i) {
    if (i >= m.tok.size() || m.tok[i].punct) {
        return std::nullopt;
    }
    for (const auto& p : lx.months) {
        if (p.words.size() == 1 && p.words[0] == m.tok[i].word) {
            return std::stoi(p.value);
        }
    }
    return std::nullopt;
}

std::optional<int> day_at(const Marked& m, std::size_t i) {
    if (i >= m.tok.size() || !m.tok[i].digits || m.tok[i].word.size() > 2 || !m.tok[i].number) {
        return std::nullopt;
    }
    const int d = static_cast<int>(*m.tok[i].number);
    if (d < 1 || d > 31 || *m.tok[i].number != d) {
        return std::nullopt;
    }
    return d;
}

std::optional<int> year_at(const Marked& m, std::size_t i) {
    if (i >= m.tok.size() || !m.tok[i].digits || m.tok[i].word.size() != 4 || !m.tok[i].number) {
        return std::nullopt;
    }
    const int y = static_cast<int>(*m.tok[i].number);
    return y >= 2000 && y <= 2100 ? std::optional<int>(y) : std::nullopt;
}

std::optional<Date> resolve(std::optional<int> year, int month, int day, Date reference) {
    using namespace std::chrono;
    if (year) {
        return make_date(*year, month, day);
    }
    const int ry = static_cast<int>(year_month_day(reference).year());
    for (int y = ry; y <= ry + 1; ++y) {
        const auto d = make_date(y, month, day);
        if (d && *d >= reference) {
            return d;
        }
    }
    return std::nullopt;
}

struct DateHit {
    std::size_t pos;
    Date date;
};

bool until_at(const Marked& m, std::size_t i) {
    return i < m.tok.size() && (is(m, i, "until") || m.tok[i].word == "-");
}

std::size_t until_len(const Marked& m, std::size_t i) {
    return m.tok[i].word == "-" ? 1 : m.span[i];
}

// A "day month [year]" or "month day [year]" expression at i: (month, day, year, tokens used).
struct Dmy {
    int month = 0;
    int day = 0;
    std::optional<int> year;
    std::size_t len = 0;
};

std::optional<Dmy> full_date_at(const Marked& m, const Lexicon& lx, std::size_t i) {
    if (auto d = day_at(m, i)) {
        std::size_t j = i + 1;
        if (j < m.tok.size() && (m.tok[j].word == "di" || m.tok[j].word == "of")) {
            ++j;
        }
        if (auto mo = month_at(m, lx, j)) {
            auto y = year_at(m, j + 1);
            return Dmy{*mo, *d, y, j + 1 - i + (y ? 1 : 0)};
        }
    }
    if (auto mo = month_at(m, lx, i)) {
        std::size_t j = i + 1;
        if (j < m.tok.size() && m.tok[j].word == "the") {
            ++j;
        }
        if (auto d = day_at(m, j)) {
            std::size_t k = j + 1;
            if (k < m.tok.size() && m.tok[k].punct && year_at(m, k + 1)) {
                ++k;
            }
            auto y = year_at(m, k);
            return Dmy{*mo, *d, y, (y ? k + 1 : j + 1) - i};
        }
    }
    return std::nullopt;
}

std::vector<DateHit> find_dates(Marked& m, const Lexicon& lx, Date reference) {
    static const std::regex iso(R"((\d{4})-(\d{2})-(\d{2}))");
    static const std::regex slash(R"((\d{1,2})/(\d{1,2})(?:/(\d{2}|\d{4}))?)");
    static const std::regex dotted(R"((\d{1,2})\.(\d{1,2})\.(\d{4}))");
    static const std::regex day_range(R"((\d{1,2})-(\d{1,2}))");
    std::vector<DateHit> out;
    const auto use = [&](std::size_t from, std::size_t len) {
        for (std::size_t k = from; k < from + len && k < m.used.size(); ++k) {
            m.used[k] = true;
        }
    };
    const auto with_end_year = [&](Date start, int month, int day, std::optional<int> year) -> std::optional<Date> {
        if (year) {
            return make_date(*year, month, day);
        }
        // an end month earlier in the calendar crosses New Year; the same month never does
        const auto ymd = std::chrono::year_month_day(start);
        const int y = static_cast<int>(ymd.year()) + (month < static_cast<int>(static_cast<unsigned>(ymd.month())) ? 1 : 0);
        return make_date(y, month, day);
    };
    for (std::size_t i = 0; i < m.tok.size(); ++i) {
        if (m.used[i] || m.tok[i].punct) {
            continue;
        }
        const auto& w = m.tok[i].word;
        std::smatch g;
        if (std::regex_match(w, g, iso)) {
            if (auto d = make_date(std::stoi(g[1]), std::stoi(g[2]), std::stoi(g[3]))) {
                out.push_back({i, *d});
                use(i, 1);
            }
            continue;
        }
        if (std::regex_match(w, g, slash) || std::regex_match(w, g, dotted)) {
            std::optional<int> year;
            if (g[3].matched) {
                year = std::stoi(g[3]);
                if (*year < 100) {
                    *year += 2000;
                }
            }
            if (auto d = resolve(year, std::stoi(g[2]), std::stoi(g[1]), reference)) {
                out.push_back({i, *d});
                use(i, 1);
            }
            continue;
        }
        if (std::regex_match(w, g, day_range)) {
            if (auto mo = month_at(m, lx, i + 1)) {
                auto y = year_at(m, i + 2);
                auto a = resolve(y, *mo, std::stoi(g[1]), reference);
                if (a) {
                    if (auto b = with_end_year(*a, *mo, std::stoi(g[2]), y)) {
                        out.push_back({i, *a});
                        out.push_back({i, *b});
                        use(i, y ? 3 : 2);
                    }
                }
            }
            continue;
        }
        if (auto mo = month_at(m, lx, i); mo && i + 1 < m.tok.size() && std::regex_match(m.tok[i + 1].word, g, day_range)) {
            auto y = year_at(m, i + 2);
            auto a = resolve(y, *mo, std::stoi(g[1]), reference);
            if (a) {
                if (auto b = with_end_year(*a, *mo, std::stoi(g[2]), y)) {
                    out.push_back({i, *a});
                    out.push_back({i + 1, *b});
                    use(i, y ? 3 : 2);
                    ++i;
                }
            }
            continue;
        }
        if (auto full = full_date_at(m, lx, i)) {
            auto a = resolve(full->year, full->month, full->day, reference);
            if (!a) {
                continue;
            }
            out.push_back({i, *a});
            use(i, full->len);
            // "June 10 to 13": a bare day after the connector shares the month.
            const std::size_t j = i + full->len;
            if (month_at(m, lx, i) && until_at(m, j)) {
                const std::size_t k = j + until_len(m, j);
                if (auto d2 = day_at(m, k); d2 && !full_date_at(m, lx, k)) {
                    if (auto b = with_end_year(*a, full->month, *d2, full->year)) {
                        out.push_back({k, *b});
                        use(j, k + 1 - j);
                    }
                }
            }
            i += full->len - 1;
            continue;
        }
        // "dal 10 al 13 giugno": the first day borrows the month and year of the second.
        if (auto d1 = day_at(m, i); d1 && until_at(m, i + 1)) {
            const std::size_t k = i + 1 + until_len(m, i + 1);
            if (auto full = full_date_at(m, lx, k); full && day_at(m, k)) {
                auto a = resolve(full->year, full->month, *d1, reference);
                if (a) {
                    auto b = with_end_year(*a, full->month, full->day, full->year);
                    if (b) {
                        out.push_back({i, *a});
                        out.push_back({k, *b});
                        use(i, k + full->len - i);
                        i = k + full->len - 1;
                    }
                }
            }
            continue;
        }
        if (is(m, i, "today")) {
            out.push_back({i, reference});
            use(i, 1);
        } else if (is(m, i, "tomorrow")) {
            out.push_back({i, reference + std::chrono::days(1)});
            use(i, 1);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const DateHit& a, const DateHit& b) { return a.pos < b.pos; });
    return out;
}

// The number immediately before a marker of `role` at i, skipping "di"/"of".
std::optional<std::size_t> number_before(const Marked& m, std::size_t i) {
    if (i == 0) {
        return std::nullopt;
    }
    std::size_t j = i - 1;
    if ((m.tok[j].word == "di" || m.tok[j].word == "of") && j > 0) {
        --j;
    }
    if (m.tok[j].number && !m.used[j]) {
        return j;
    }
    return std::nullopt;
}

std::optional<std::size_t> number_after(const Marked& m, std::size_t i, std::size_t window) {
    for (std::size_t j = i; j < m.tok.size() && j < i + window; ++j) {
        if (m.tok[j].punct && m.tok[j].word != ":") {
            break;
        }
        if (m.tok[j].number && !m.used[j]) {
            return j;
        }
    }
    return std::nullopt;
}

// Looks back from a phrase start to the previous clause boundary (at most 3 words) for a marker.
bool preceded_by(const Marked& m, std::size_t i, std::string_view role) {
    for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
        const std::size_t j = i - back;
        if (m.tok[j].punct || is(m, j, "clause")) {
            return false;
        }
        if (m.role[j] == role) {
            return true;
        }
        // inside a multi-word marker
        for (std::size_t s = 0; s < j; ++s) {
            if (m.role[s] == role && s + m.span[s] > j) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

std::vector<Token> tokenize(const std::string& message, const Lexicon& lexicon) {
    std::string prepared;
    for (std::size_t i = 0; i < message.size(); ++i) {
        if (message.compare(i, 3, "\xE2\x82\xAC") == 0) {  // euro sign
            prepared += " euro ";
            i += 2;
        } else {
            prepared.push_back(message[i]);
        }
    }
    const auto folded = text::fold(text::sanitize_utf8(prepared));
    static const std::regex ordinal(R"((\d{1,2})(st|nd|rd|th|o|a))");
    std::vector<Token> out;
    std::string cur;
    const auto flush = [&] {
        if (cur.empty()) {
            return;
        }
        Token t;
        std::smatch g;
        if (std::regex_match(cur, g, ordinal)) {
            cur = g[1];
        }
        t.word = cur;
        t.digits = std::isdigit(static_cast<unsigned char>(cur.front())) != 0;
        if (t.digits) {
            t.number = parse_digits(cur);
        }
        out.push_back(std::move(t));
        cur.clear();
    };
    for (std::size_t i = 0; i < folded.size(); ++i) {
        const auto c = static_cast<unsigned char>(folded[i]);
        const bool digit_run = !cur.empty() && std::isdigit(static_cast<unsigned char>(cur.front()));
        const bool next_digit = i + 1 < folded.size() && std::isdigit(static_cast<unsigned char>(folded[i + 1]));
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(folded[i]);
        } else if (digit_run && next_digit && (c == '.' || c == ',' || c == '/' || c == '-' || c == ':')) {
            cur.push_back(folded[i]);
        } else {
            flush();
            if (c == ',' || c == '.' || c == ';' || c == '!' || c == '?' || c == ':') {
                out.push_back(Token{std::string(1, static_cast<char>(c)), true, false, std::nullopt});
            } else if (c == '-') {
                out.push_back(Token{"-", false, false, std::nullopt});
            }
        }
    }
    flush();
    for (auto& t : out) {
        if (t.number || t.punct) {
            continue;
        }
        for (const auto& p : lexicon.numbers) {
            if (p.words.size() == 1 && p.words[0] == t.word) {
                t.number = std::stod(p.value);
            }
        }
    }
    return out;
}

std::vector<std::string> find_destinations(const std::vector<Token>& tokens, const std::vector<std::string>& destinations) {
    std::vector<std::pair<std::size_t, std::string>> hits;
    const auto close = [](const std::string& a, const std::string& b) {
        return a == b || (a.size() >= 5 && b.size() >= 5 && text::edit_distance(a, b) <= 1);
    };
    for (const auto& dest : destinations) {
        const auto dw = text::words(dest);
        if (dw.empty()) {
            continue;
        }
        for (std::size_t i = 0; i + dw.size() <= tokens.size(); ++i) {
            bool ok = true;
            for (std::size_t k = 0; k < dw.size() && ok; ++k) {
                ok = !tokens[i + k].punct && close(tokens[i + k].word, dw[k]);
            }
            if (ok) {
                hits.emplace_back(i, dest);
                break;
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::string> out;
    for (auto& [_, d] : hits) {
        out.push_back(std::move(d));
    }
    return out;
}

SlotUpdate extract_slots(const std::string& message, Slot pending, const Lexicon& lexicon,
                         const std::vector<std::string>& destinations, Date reference) {
    return extract_slots(tokenize(message, lexicon), pending, lexicon, destinations, reference);
}

SlotUpdate extract_slots(const std::vector<Token>& tokens, Slot pending, const Lexicon& lexicon,
                         const std::vector<std::string>& destinations, Date reference) {
    SlotUpdate u;
    Marked m;
    m.tok = tokens;
    const std::size_t n = m.tok.size();
    m.role.assign(n, {});
    m.span.assign(n, 0);
    m.covered.assign(n, false);
    m.used.assign(n, false);

    if (const auto dests = find_destinations(m.tok, destinations); !dests.empty()) {
        u.destination = dests.front();
    }

    const auto restriction_hits = take(m, lexicon.restrictions);
    for (const auto& [i, p] : take(m, lexicon.markers)) {
        m.role[i] = p->value;
        m.span[i] = p->words.size();
    }
    for (const auto& [i, p] : restriction_hits) {
        if (!preceded_by(m, i, "negation")) {
            u.restrictions.insert(p->value);
        }
    }
    for (const auto& [i, p] : take(m, lexicon.allergens)) {
        const bool free_after = i + p->words.size() < n && m.tok[i + p->words.size()].word == "free";
        if (preceded_by(m, i, "allergy") || preceded_by(m, i, "allergen_free") || free_after) {
            u.restrictions.insert("allergy:" + p->value);
        }
    }
    for (const auto& [i, p] : take(m, lexicon.pace)) {
        if (!preceded_by(m, i, "negation")) {
            u.pace = planner::pace_from_string(p->value);
        }
    }

    // Dates first so day numbers are not read as people or money.
    const auto dates = find_dates(m, lexicon, reference);
    if (!dates.empty()) {
        u.start_date = dates[0].date;
    }
    if (dates.size() >= 2) {
        u.end_date = dates[1].date;
    }

    std::optional<double> adults;
    std::optional<double> people;
    std::optional<double> children;
    bool weekend = false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = m.role[i];
        if (r.empty()) {
            continue;
        }
        auto before = number_before(m, i);
        if (r == "nights" || r == "days" || r == "weeks") {
            // "una settimana" and "a week" count as one
            const double count = before ? *m.tok[*before].number : (r == "weeks" ? 1.0 : -1.0);
            if (count < 0 || count != std::floor(count)) {
                continue;
            }
            if (before) {
                m.used[*before] = true;
            }
            const int c = static_cast<int>(count);
            u.nights = r == "nights" ? c : r == "days" ? std::max(0, c - 1) : 7 * c;
        } else if (r == "adults" || r == "children" || r == "people") {
            if (!before && r != "people") {
                // "adulti: 2"
                if (auto after = number_after(m, i + m.span[i], 2)) {
                    before = after;
                }
            }
            if (!before) {
                continue;
            }
            m.used[*before] = true;
            (r == "adults" ? adults : r == "children" ? children : people) = *m.tok[*before].number;
        } else if (r == "weekend") {
            weekend = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (is(m, i, "group")) {
            if (auto j = number_after(m, i + m.span[i], 1); j && !people && !adults) {
                m.used[*j] = true;
                people = *m.tok[*j].number;
            }
        }
    }
    const auto has_role = [&](std::string_view role) {
        return std::any_of(m.role.begin(), m.role.end(), [&](const std::string& r) { return r == role; });
    };
    if (!adults && !people) {
        if (has_role("solo")) {
            adults = 1;
        } else if (has_role("couple")) {
            adults = 2;
        }
    }
    if (!children) {
        if (has_role("no_children")) {
            children = 0;
        } else if (has_role("one_child")) {
            children = 1;
            if (!adults && !people) {
                adults = 2;
            }
        }
    }
    if (!adults && people) {
        adults = children && *people > *children ? *people - *children : *people;
    }
    if (weekend && !u.nights && !u.start_date) {
        using namespace std::chrono;
        auto d = reference;
        while (weekday(d) != Friday) {
            d += days(1);
        }
        u.start_date = d;
        u.nights = 2;
    } else if (weekend && !u.nights) {
        u.nights = 2;
    }

    // Money: "300 euro", "euro 300", "budget di 300", "massimo 300".
    for (std::size_t i = 0; i < n && !u.budget_total; ++i) {
        if (is(m, i, "currency")) {
            auto j = number_before(m, i);
            if (!j) {
                j = number_after(m, i + 1, 1);
            }
            if (j) {
                double v = *m.tok[*j].number;
                if (*j + 1 < n && (m.tok[*j + 1].word == "mila")) {
                    v *= 1000.0;
                }
                m.used[*j] = true;
                u.budget_total = v;
            }
        }
    }
    for (std::size_t i = 0; i < n && !u.budget_total; ++i) {
        if (is(m, i, "budget")) {
            if (auto j = number_after(m, i + m.span[i], 3)) {
                m.used[*j] = true;
                u.budget_total = *m.tok[*j].number;
            }
        }
    }

    // A bare number answers the pending question.
    std::vector<std::size_t> free_numbers;
    for (std::size_t i = 0; i < n; ++i) {
        if (m.tok[i].number && !m.used[i]) {
            free_numbers.push_back(i);
        }
    }
    if (free_numbers.size() == 1) {
        const double v = *m.tok[free_numbers[0]].number;
        if (pending == Slot::budget && !u.budget_total && m.tok[free_numbers[0]].digits) {
            u.budget_total = v;
        } else if (pending == Slot::party && !adults && v == std::floor(v)) {
            adults = v;
        }
    }

    if (adults) {
        u.adults = static_cast<int>(*adults);
    }
    if (children) {
        u.children = static_cast<int>(*children);
    }

    if (pending == Slot::preferences && has_role("everything")) {
        for (const auto& p : lexicon.tags) {
            u.preference_weights[p.value] = 1.0;
        }
    }
    for (const auto& [i, p] : take(m, lexicon.tags)) {
        double w = 1.0;
        if (preceded_by(m, i, "negation")) {
            w = 0.0;
        } else if (preceded_by(m, i, "soft")) {
            w = 0.5;
        }
        auto& slot = u.preference_weights[p->value];
        slot = std::max(slot, w);
        if (w == 0.0) {
            slot = 0.0;
        }
    }
    return u;
}

}  // namespace itinera::dialogue
