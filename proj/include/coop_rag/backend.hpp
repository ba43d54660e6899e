#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace coop_rag {

enum class BackendStatus { up, down, stub };

constexpr std::string_view to_string(BackendStatus s) noexcept {
  switch (s) {
    case BackendStatus::up: return "up";
    case BackendStatus::down: return "down";
    case BackendStatus::stub: return "stub";
  }
  return "down";
}

// Wire dialect for remote backends. `native` is this project's own JSON
// schema; `openai` adapts to OpenAI-compatible embedding/chat endpoints.
enum class ApiStyle { native, openai };

struct RemoteEndpoint {
  std::string base_url;
  std::string model_name;
  std::string auth_env_var;
  int timeout_ms = 30000;
  int max_in_flight = 4;
  double temperature = 0.2; // generation only
  ApiStyle api_style = ApiStyle::native;

  void validate(std::string_view what) const;
  // Bearer token read from auth_env_var, if set and present.
  [[nodiscard]] std::optional<std::string> bearer_token() const;
};

/// Last-known reachability of a remote backend, updated by calls and probes.
class StatusCell {
public:
  void mark(bool ok) noexcept { up_.store(ok, std::memory_order_relaxed); }
  [[nodiscard]] BackendStatus get() const noexcept {
    return up_.load(std::memory_order_relaxed) ? BackendStatus::up : BackendStatus::down;
  }

private:
  std::atomic<bool> up_{true};
};

} // namespace coop_rag
