#include "itinera/dialogue/store.hpp"

#include "itinera/common/errors.hpp"
#include "itinera/common/files.hpp"
#include "itinera/common/text.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <spdlog/spdlog.h>

namespace itinera::dialogue {

namespace {

void check_id(const std::string& id) {
    static const std::regex ok(R"([A-Za-z0-9_-]{1,64})");
    if (!std::regex_match(id, ok)) {
        throw NotFoundError("no session '" + id + "'");
    }
}

}  // namespace

std::string random_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    return text::hex64(rng()) + text::hex64(rng());
}

SessionStore::SessionStore(std::filesystem::path root, std::size_t snapshot_every,
                           std::function<std::string()> id_generator)
    : root_(std::move(root)), snapshot_every_(std::max<std::size_t>(1, snapshot_every)),
      id_generator_(std::move(id_generator)) {
    std::filesystem::create_directories(root_ / "sessions");
    std::filesystem::create_directories(root_ / "snapshots");
}

std::string SessionStore::new_id() {
    std::lock_guard lock(id_mutex_);
    for (;;) {
        auto id = id_generator_();
        check_id(id);
        if (!exists(id)) {
            return id;
        }
    }
}

std::filesystem::path SessionStore::log_path(const std::string& id) const {
    check_id(id);
    return root_ / "sessions" / (id + ".jsonl");
}

std::filesystem::path SessionStore::snapshot_path(const std::string& id) const {
    check_id(id);
    return root_ / "snapshots" / (id + ".json");
}

bool SessionStore::exists(const std::string& id) const {
    try {
        return std::filesystem::exists(log_path(id));
    } catch (const NotFoundError&) {
        return false;
    }
}

void SessionStore::append(const SessionState& state, const std::vector<Event>& events) {
    if (events.empty()) {
        return;
    }
    // One write per batch; the last event carries "commit" so replay can drop a batch cut short.
    std::vector<std::string> lines;
    for (std::size_t i = 0; i + 1 < events.size(); ++i) {
        lines.push_back(events[i].dump());
    }
    auto last = events.back();
    last["commit"] = true;
    lines.push_back(last.dump());
    files::append_lines(log_path(state.session_id), lines);
    const std::size_t before = state.event_count - events.size();
    if (state.event_count / snapshot_every_ != before / snapshot_every_) {
        const nlohmann::json snap = {{"events", state.event_count}, {"state", state}};
        files::write_atomic(snapshot_path(state.session_id), snap.dump());
    }
}

SessionState SessionStore::replay_from(const std::string& id, SessionState state, std::size_t skip) const {
    const auto path = log_path(id);
    if (!std::filesystem::exists(path)) {
        throw NotFoundError("no session '" + id + "'");
    }
    const auto content = files::read_all(path);
    const auto lines = text::split(content, '\n');
    std::size_t index = 0;
    std::vector<nlohmann::json> pending;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const bool last = i + 1 == lines.size();  // no trailing newline: possibly torn
        nlohmann::json e;
        try {
            e = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error&) {
            if (last) {
                spdlog::warn("session {}: ignoring torn final log line", id);
                break;
            }
            throw ValidationError("event log", "corrupt line " + std::to_string(i + 1) + " in " + path.string());
        }
        if (index++ < skip) {
            continue;
        }
        const bool commit = e.value("commit", false);
        pending.push_back(std::move(e));
        if (commit) {
            for (const auto& p : pending) {
                apply_event(state, p);
            }
            pending.clear();
        }
    }
    if (!pending.empty()) {
        spdlog::warn("session {}: dropping {} uncommitted events", id, pending.size());
    }
    if (index < skip) {
        throw ValidationError("event log", "shorter than its snapshot: " + path.string());
    }
    return state;
}

SessionState SessionStore::replay(const std::string& id) const {
    return replay_from(id, SessionState{}, 0);
}

SessionState SessionStore::load(const std::string& id) const {
    const auto snap = snapshot_path(id);
    if (std::filesystem::exists(snap)) {
        const auto j = nlohmann::json::parse(files::read_all(snap));
        return replay_from(id, j.at("state").get<SessionState>(), j.at("events").get<std::size_t>());
    }
    return replay(id);
}

std::vector<std::string> SessionStore::ids() const {
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(root_ / "sessions")) {
        if (entry.path().extension() == ".jsonl") {
            out.push_back(entry.path().stem().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace itinera::dialogue
