#pragma once

#include "coop_rag/backend.hpp"

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>

namespace coop_rag {

struct HttpResult {
  int status = 0;
  std::string body;
};

// POSTs a JSON body to base_url + path. Transport failures throw
// Error(transport) and timeouts throw Error(timeout); any HTTP status is
// returned to the caller.
HttpResult http_post_json(const RemoteEndpoint &endpoint, std::string_view path,
                          const std::string &body);

// True when the server answers any HTTP request at base_url.
bool http_probe(const RemoteEndpoint &endpoint, int timeout_ms = 1000);

/// Caps concurrent in-flight requests to one backend.
class InFlightLimiter {
public:
  explicit InFlightLimiter(std::size_t max) : max_(max == 0 ? 1 : max) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < max_; });
    ++in_flight_;
  }
  void release() {
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    cv_.notify_one();
  }

  class Guard {
  public:
    explicit Guard(InFlightLimiter &l) : l_(l) { l_.acquire(); }
    ~Guard() { l_.release(); }
    Guard(const Guard &) = delete;
    Guard &operator=(const Guard &) = delete;

  private:
    InFlightLimiter &l_;
  };

private:
  std::size_t max_;
  std::size_t in_flight_ = 0;
  std::mutex mutex_;
  std::condition_variable cv_;
};

} // namespace coop_rag
