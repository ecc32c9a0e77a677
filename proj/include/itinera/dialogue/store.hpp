#pragma once

#include "itinera/dialogue/session.hpp"

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace itinera::dialogue {

/// Random 128-bit hex id.
std::string random_session_id();

/// Per-session append-only JSON-lines event log with periodic snapshots.
///   <root>/sessions/<id>.jsonl    one event per line, flushed before append returns; the last
///                                 event of each append carries "commit": true and replay drops
///                                 an uncommitted tail, so a turn is restored whole or not at all
///   <root>/snapshots/<id>.json    {"events": n, "state": ...}, replaced atomically
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path root, std::size_t snapshot_every = 32,
                          std::function<std::string()> id_generator = random_session_id);

    std::string new_id();

    /// Appends events already applied to `state` (state.event_count includes them).
    void append(const SessionState& state, const std::vector<Event>& events);

    /// Snapshot (if any) plus the log tail. A torn final line from an interrupted write is ignored.
    /// Throws NotFoundError for an unknown id.
    SessionState load(const std::string& id) const;

    /// Replays only the log, ignoring snapshots.
    SessionState replay(const std::string& id) const;

    std::vector<std::string> ids() const;
    bool exists(const std::string& id) const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path log_path(const std::string& id) const;
    std::filesystem::path snapshot_path(const std::string& id) const;
    SessionState replay_from(const std::string& id, SessionState state, std::size_t skip) const;

    std::filesystem::path root_;
    std::size_t snapshot_every_;
    std::function<std::string()> id_generator_;
    std::mutex id_mutex_;
};

}  // namespace itinera::dialogue
