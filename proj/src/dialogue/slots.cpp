#include "itinera/dialogue/slots.hpp"

#include "itinera/common/errors.hpp"

#include <cmath>

namespace itinera::dialogue {

namespace {

constexpr std::string_view kSlotNames[] = {"destination", "dates", "party", "preferences", "budget", "none"};

}  // namespace

std::string_view to_string(Slot s) {
    return kSlotNames[static_cast<std::size_t>(s)];
}

Slot slot_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kSlotNames); ++i) {
        if (kSlotNames[i] == s) {
            return static_cast<Slot>(i);
        }
    }
    throw ValidationError("slot", "unknown slot '" + std::string(s) + "'");
}

bool SlotUpdate::empty() const {
    return !destination && !start_date && !end_date && !nights && !adults && !children &&
           preference_weights.empty() && restrictions.empty() && !budget_total && !pace;
}

bool is_valid(const SlotUpdate& u, std::string* why) {
    const auto fail = [&](const char* reason) {
        if (why) {
            *why = reason;
        }
        return false;
    };
    if (u.destination && u.destination->empty()) {
        return fail("empty destination");
    }
    if (u.start_date && u.end_date && *u.end_date < *u.start_date) {
        return fail("end date before start date");
    }
    if (u.nights && (*u.nights < 0 || *u.nights > 60)) {
        return fail("nights out of range");
    }
    if (u.adults && (*u.adults < 1 || *u.adults > 50)) {
        return fail("adults out of range");
    }
    if (u.children && (*u.children < 0 || *u.children > 50)) {
        return fail("children out of range");
    }
    if (u.budget_total && (!std::isfinite(*u.budget_total) || *u.budget_total < 0.0)) {
        return fail("negative budget");
    }
    for (const auto& [tag, w] : u.preference_weights) {
        if (tag.empty() || !std::isfinite(w) || w < 0.0 || w > 1.0) {
            return fail("preference weight outside [0, 1]");
        }
    }
    return true;
}

void to_json(nlohmann::json& j, const SlotUpdate& u) {
    j = nlohmann::json::object();
    if (u.destination) {
        j["destination"] = *u.destination;
    }
    if (u.start_date) {
        j["start_date"] = format_iso_date(*u.start_date);
    }
    if (u.end_date) {
        j["end_date"] = format_iso_date(*u.end_date);
    }
    if (u.nights) {
        j["nights"] = *u.nights;
    }
    if (u.adults) {
        j["adults"] = *u.adults;
    }
    if (u.children) {
        j["children"] = *u.children;
    }
    if (!u.preference_weights.empty()) {
        j["preference_weights"] = u.preference_weights;
    }
    if (!u.restrictions.empty()) {
        j["restrictions"] = u.restrictions;
    }
    if (u.budget_total) {
        j["budget_total"] = *u.budget_total;
    }
    if (u.pace) {
        j["pace"] = planner::to_string(*u.pace);
    }
}

void from_json(const nlohmann::json& j, SlotUpdate& u) {
    u = SlotUpdate{};
    const auto date = [&](const char* key) -> std::optional<Date> {
        if (!j.contains(key) || j.at(key).is_null()) {
            return std::nullopt;
        }
        const auto d = parse_iso_date(j.at(key).get<std::string>());
        if (!d) {
            throw ValidationError(key, "not an ISO date");
        }
        return d;
    };
    const auto number = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) {
            return std::nullopt;
        }
        return j.at(key).get<double>();
    };
    const auto integer = [&](const char* key) -> std::optional<int> {
        const auto v = number(key);
        if (!v) {
            return std::nullopt;
        }
        if (*v != std::floor(*v)) {
            throw ValidationError(key, "not a whole number");
        }
        return static_cast<int>(*v);
    };
    if (j.contains("destination") && !j.at("destination").is_null()) {
        u.destination = j.at("destination").get<std::string>();
    }
    u.start_date = date("start_date");
    u.end_date = date("end_date");
    u.nights = integer("nights");
    u.adults = integer("adults");
    u.children = integer("children");
    u.budget_total = number("budget_total");
    if (j.contains("preference_weights")) {
        j.at("preference_weights").get_to(u.preference_weights);
    }
    if (j.contains("preferences")) {
        // Model answers may list tags instead of weighting them.
        for (const auto& tag : j.at("preferences")) {
            u.preference_weights[tag.get<std::string>()] = 1.0;
        }
    }
    if (j.contains("restrictions")) {
        j.at("restrictions").get_to(u.restrictions);
    }
    if (j.contains("pace") && !j.at("pace").is_null()) {
        u.pace = planner::pace_from_string(j.at("pace").get<std::string>());
    }
}

}  // namespace itinera::dialogue
