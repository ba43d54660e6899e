#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

namespace coop_rag {

/// Time source for latency measurement and turn timestamps. The frozen
/// variant makes latency and timestamps constant so reports are reproducible.
class Clock {
public:
  virtual ~Clock() = default;
  virtual std::chrono::system_clock::time_point wall_now() const = 0;
  virtual std::chrono::steady_clock::time_point steady_now() const = 0;
};

class SystemClock final : public Clock {
public:
  std::chrono::system_clock::time_point wall_now() const override {
    return std::chrono::system_clock::now();
  }
  std::chrono::steady_clock::time_point steady_now() const override {
    return std::chrono::steady_clock::now();
  }
};

class FrozenClock final : public Clock {
public:
  explicit FrozenClock(std::chrono::system_clock::time_point at = {}) : at_(at) {}
  std::chrono::system_clock::time_point wall_now() const override { return at_; }
  std::chrono::steady_clock::time_point steady_now() const override { return {}; }

private:
  std::chrono::system_clock::time_point at_;
};

std::shared_ptr<const Clock> system_clock();

// ISO-8601 UTC with millisecond precision, e.g. 2024-05-01T12:00:00.000Z.
std::string format_utc(std::chrono::system_clock::time_point tp);
// YYYY-MM-DD (UTC).
std::string format_utc_date(std::chrono::system_clock::time_point tp);
std::chrono::system_clock::time_point parse_utc(const std::string &text);

} // namespace coop_rag
