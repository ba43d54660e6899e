#pragma once

#include "coop_rag/clock.hpp"
#include "coop_rag/prompt.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace coop_rag {

struct Session {
  std::string session_id;
  std::vector<Turn> turns;
  ResponseStyle style = ResponseStyle::concise;
  std::chrono::system_clock::time_point created_at;
};

/// Thread-safe session registry. Work on one session is serialized through
/// `with_session`; different sessions never block each other.
///
/// With a log path, every session creation and turn is appended to a JSONL
/// file and replayed on construction.
class SessionStore {
public:
  explicit SessionStore(std::shared_ptr<const Clock> clock = system_clock(),
                        std::optional<std::filesystem::path> log_path = std::nullopt);

  std::string create(ResponseStyle style = ResponseStyle::concise);
  [[nodiscard]] bool exists(const std::string &session_id) const;
  // Copy of the session. Throws Error(unknown_session).
  [[nodiscard]] Session snapshot(const std::string &session_id) const;
  [[nodiscard]] std::size_t size() const;

  // Runs `fn(Session &)` holding the session's exclusive lock.
  template <typename F>
  auto with_session(const std::string &session_id, F &&fn) {
    auto entry = find(session_id);
    std::lock_guard lock(entry->mutex);
    return fn(entry->session);
  }

  // Appends a turn stamped with the store's clock. Caller must hold the
  // session (call from inside with_session).
  void record_turn(Session &session, std::string question, std::string answer,
                   std::vector<std::string> contexts_used);
  // Locking variant for callers outside with_session.
  void record_turn(const std::string &session_id, std::string question, std::string answer,
                   std::vector<std::string> contexts_used);

  void flush();

private:
  struct Entry {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string &session_id) const;
  void replay(const std::filesystem::path &path);
  void append_log(const std::string &line);
  std::string new_id();

  std::shared_ptr<const Clock> clock_;
  mutable std::mutex map_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex log_mutex_;
  std::ofstream log_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_ = 0;
};

} // namespace coop_rag
