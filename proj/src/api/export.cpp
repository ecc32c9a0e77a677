#include "itinera/api/export.hpp"

#include "itinera/common/dates.hpp"
#include "itinera/common/errors.hpp"
#include "itinera/common/text.hpp"

#include <fmt/format.h>

namespace itinera::api {

namespace {

struct Row {
    std::string time;
    std::string place;
    std::string cost;
};

struct Day {
    std::string heading;
    std::vector<Row> rows;
};

struct Document {
    std::string title;
    std::string summary;
    std::string col_time, col_poi, col_cost;
    std::vector<Day> days;
    std::string empty_day;
    std::string totals;
    std::string notes_heading;
    std::vector<std::string> notes;
    std::string narration_heading;
    std::string narration;
};

std::string money(double v) {
    return fmt::format("{:.2f}", v);
}

Document build(const dialogue::SessionState& s, const dialogue::StringTable& t) {
    if (!s.current_itinerary) {
        throw NotFoundError("session " + s.session_id + " has no itinerary");
    }
    const auto& it = *s.current_itinerary;
    const auto& c = s.collected;
    Document d;
    d.title = t.get("export.title", {{"destination", c.destination.value_or("")}});
    const int party = c.adults.value_or(0) + c.children.value_or(0);
    d.summary = t.get("export.summary", {{"start", c.start_date ? format_iso_date(*c.start_date) : ""},
                                         {"end", c.end_date ? format_iso_date(*c.end_date) : ""},
                                         {"party", std::to_string(party)},
                                         {"budget", money(c.budget_total.value_or(0.0))}});
    d.col_time = t.get("export.col.time");
    d.col_poi = t.get("export.col.poi");
    d.col_cost = t.get("export.col.cost");
    for (std::size_t i = 0; i < it.days.size(); ++i) {
        const auto& day = it.days[i];
        Day out;
        out.heading = t.get("export.day", {{"n", std::to_string(i + 1)}, {"date", format_iso_date(day.date)}});
        for (const auto& v : day.visits) {
            out.rows.push_back({text::format_clock(v.arrival) + "-" + text::format_clock(v.departure), v.poi_name,
                                money(v.cost_for_party) + " EUR"});
        }
        d.days.push_back(std::move(out));
    }
    d.empty_day = t.get("export.empty_day");
    d.totals = t.get("export.totals",
                     {{"cost", money(it.totals.cost)}, {"travel", std::to_string(it.totals.travel_minutes)}});
    d.notes_heading = t.get("export.notes");
    d.notes.push_back(t.get("export.note.hours"));
    d.narration_heading = t.get("export.narration");
    d.narration = s.narration;
    return d;
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '|' || ch == '\\') {
            out += '\\';
        }
        out += ch == '\n' ? ' ' : ch;
    }
    return out;
}

std::string html_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string render_markdown(const dialogue::SessionState& state, const dialogue::StringTable& strings) {
    const auto d = build(state, strings);
    std::string out = "# " + d.title + "\n\n" + d.summary + "\n";
    for (const auto& day : d.days) {
        out += "\n## " + day.heading + "\n\n";
        if (day.rows.empty()) {
            out += d.empty_day + "\n";
            continue;
        }
        out += "| " + d.col_time + " | " + d.col_poi + " | " + d.col_cost + " |\n|---|---|---:|\n";
        for (const auto& r : day.rows) {
            out += "| " + r.time + " | " + md_cell(r.place) + " | " + r.cost + " |\n";
        }
    }
    out += "\n**" + d.totals + "**\n\n## " + d.notes_heading + "\n\n";
    for (const auto& n : d.notes) {
        out += "- " + n + "\n";
    }
    if (!d.narration.empty()) {
        out += "\n## " + d.narration_heading + "\n\n" + d.narration + "\n";
    }
    return out;
}

std::string render_html(const dialogue::SessionState& state, const dialogue::StringTable& strings) {
    const auto d = build(state, strings);
    std::string out = "<!DOCTYPE html>\n<html lang=\"" + html_escape(state.language) +
                      "\">\n<head>\n<meta charset=\"utf-8\">\n<title>" + html_escape(d.title) +
                      "</title>\n<style>\n"
                      "body{font-family:Georgia,serif;max-width:46em;margin:2em auto;color:#222}\n"
                      "table{border-collapse:collapse;width:100%;margin:.5em 0}\n"
                      "th,td{border:1px solid #999;padding:.3em .6em;text-align:left}\n"
                      "td.cost{text-align:right}\n"
                      "@media print{body{margin:0;max-width:none}section{break-inside:avoid}}\n"
                      "</style>\n</head>\n<body>\n";
    out += "<h1>" + html_escape(d.title) + "</h1>\n<p>" + html_escape(d.summary) + "</p>\n";
    for (const auto& day : d.days) {
        out += "<section>\n<h2>" + html_escape(day.heading) + "</h2>\n";
        if (day.rows.empty()) {
            out += "<p>" + html_escape(d.empty_day) + "</p>\n</section>\n";
            continue;
        }
        out += "<table>\n<tr><th>" + html_escape(d.col_time) + "</th><th>" + html_escape(d.col_poi) + "</th><th>" +
               html_escape(d.col_cost) + "</th></tr>\n";
        for (const auto& r : day.rows) {
            out += "<tr><td>" + r.time + "</td><td>" + html_escape(r.place) + "</td><td class=\"cost\">" + r.cost +
                   "</td></tr>\n";
        }
        out += "</table>\n</section>\n";
    }
    out += "<p><strong>" + html_escape(d.totals) + "</strong></p>\n<h2>" + html_escape(d.notes_heading) +
           "</h2>\n<ul>\n";
    for (const auto& n : d.notes) {
        out += "<li>" + html_escape(n) + "</li>\n";
    }
    out += "</ul>\n";
    if (!d.narration.empty()) {
        out += "<h2>" + html_escape(d.narration_heading) + "</h2>\n";
        for (const auto& para : text::split(d.narration, '\n')) {
            if (!text::trim(para).empty()) {
                out += "<p>" + html_escape(para) + "</p>\n";
            }
        }
    }
    out += "</body>\n</html>\n";
    return out;
}

}  // namespace itinera::api
