#pragma once

#include "coop_rag/clock.hpp"
#include "coop_rag/config.hpp"
#include "coop_rag/embedding.hpp"
#include "coop_rag/generation.hpp"
#include "coop_rag/index.hpp"
#include "coop_rag/lexicon.hpp"
#include "coop_rag/orchestrator.hpp"
#include "coop_rag/session.hpp"
#include "coop_rag/vision.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coop_rag {

struct ApiRequest {
  std::string method;
  std::string path;
  // Lowercase header names.
  std::map<std::string, std::string> headers;
  std::string body;
  // Contents of a multipart "corpus" file field, if one was uploaded.
  std::optional<std::string> corpus_upload;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

// Closed set of error codes carried in {"error": {"code", "message"}} bodies.
inline constexpr std::string_view kApiErrorCodes[] = {
    "input_required",   "malformed_request",  "unknown_session", "unknown_turn",     "payload_too_large",
    "backend_failure",  "index_not_loaded",   "ingestion_disabled", "malformed_corpus", "invalid_feedback",
    "unauthorized",     "not_found",          "internal_error"};

// /v1/chat response body; also the CLI's `query --json` output.
std::string answer_to_json(const Answer &answer);

// Optional overrides; null members are built from the config.
struct ServiceBackends {
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<Generator> generator;
  std::unique_ptr<VisionBackend> vision;
};

class Service {
public:
  explicit Service(ServiceConfig config, ServiceBackends backends = {},
                   std::shared_ptr<const Clock> clock = system_clock());
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  // Dispatches one request without any network transport.
  ApiResponse handle(const ApiRequest &request);

  // Binds (port 0 picks a free port), serves on a background thread and
  // returns the bound port.
  int start();
  void stop();
  // Blocks until the server stops.
  void wait();

  void flush();
  void probe_backends();

  [[nodiscard]] const ServiceConfig &config() const noexcept;
  [[nodiscard]] std::shared_ptr<const KnowledgeIndex> index() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace coop_rag
