#include "coop_rag/session.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/hash.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <random>

namespace coop_rag {

using nlohmann::json;

SessionStore::SessionStore(std::shared_ptr<const Clock> clock, std::optional<std::filesystem::path> log_path)
    : clock_(std::move(clock)) {
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  if (!log_path) {
    return;
  }
  if (std::filesystem::exists(*log_path)) {
    replay(*log_path);
  } else if (log_path->has_parent_path()) {
    std::filesystem::create_directories(log_path->parent_path());
  }
  log_.open(*log_path, std::ios::app | std::ios::binary);
  if (!log_) {
    throw Error(Errc::io_error, "cannot open session log " + log_path->string());
  }
}

void SessionStore::replay(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      const auto j = json::parse(line);
      const auto id = j.at("session_id").get<std::string>();
      const auto type = j.at("type").get<std::string>();
      if (type == "session") {
        auto entry = std::make_shared<Entry>();
        entry->session.session_id = id;
        entry->session.style = parse_style(j.at("style").get<std::string>()).value_or(ResponseStyle::concise);
        entry->session.created_at = parse_utc(j.at("created_at").get<std::string>());
        sessions_[id] = std::move(entry);
      } else if (type == "turn") {
        const auto it = sessions_.find(id);
        if (it == sessions_.end()) {
          continue;
        }
        Turn t;
        t.question = j.at("question").get<std::string>();
        t.answer = j.at("answer").get<std::string>();
        t.timestamp = parse_utc(j.at("timestamp").get<std::string>());
        t.contexts_used = j.at("contexts_used").get<std::vector<std::string>>();
        it->second->session.turns.push_back(std::move(t));
      }
    } catch (const std::exception &e) {
      // A torn final line from a crash is expected; anything else is logged.
      spdlog::warn("session log {} line {} skipped: {}", path.string(), line_no, e.what());
    }
  }
}

std::string SessionStore::new_id() {
  std::lock_guard lock(map_mutex_);
  for (;;) {
    const auto n = ++id_counter_;
    auto id = to_hex(murmur64a(std::to_string(n), id_salt_)) + to_hex(id_salt_ + n);
    if (!sessions_.contains(id)) {
      return id;
    }
  }
}

std::string SessionStore::create(ResponseStyle style) {
  auto id = new_id();
  auto entry = std::make_shared<Entry>();
  entry->session.session_id = id;
  entry->session.style = style;
  entry->session.created_at = clock_->wall_now();
  const json line = {{"type", "session"},
                     {"session_id", id},
                     {"style", to_string(style)},
                     {"created_at", format_utc(entry->session.created_at)}};
  {
    std::lock_guard lock(map_mutex_);
    sessions_.emplace(id, std::move(entry));
  }
  append_log(line.dump());
  return id;
}

bool SessionStore::exists(const std::string &session_id) const {
  std::lock_guard lock(map_mutex_);
  return sessions_.contains(session_id);
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(map_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string &session_id) const {
  std::lock_guard lock(map_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(Errc::unknown_session, "unknown session: " + session_id);
  }
  return it->second;
}

Session SessionStore::snapshot(const std::string &session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

void SessionStore::record_turn(Session &session, std::string question, std::string answer,
                               std::vector<std::string> contexts_used) {
  Turn t{std::move(question), std::move(answer), clock_->wall_now(), std::move(contexts_used)};
  const json line = {{"type", "turn"},
                     {"session_id", session.session_id},
                     {"turn_index", session.turns.size()},
                     {"question", t.question},
                     {"answer", t.answer},
                     {"timestamp", format_utc(t.timestamp)},
                     {"contexts_used", t.contexts_used}};
  session.turns.push_back(std::move(t));
  append_log(line.dump());
}

void SessionStore::record_turn(const std::string &session_id, std::string question, std::string answer,
                               std::vector<std::string> contexts_used) {
  with_session(session_id, [&](Session &s) {
    record_turn(s, std::move(question), std::move(answer), std::move(contexts_used));
    return 0;
  });
}

void SessionStore::append_log(const std::string &line) {
  std::lock_guard lock(log_mutex_);
  if (!log_.is_open()) {
    return;
  }
  log_ << line << '\n';
  log_.flush();
}

void SessionStore::flush() {
  std::lock_guard lock(log_mutex_);
  if (log_.is_open()) {
    log_.flush();
  }
}

} // namespace coop_rag
