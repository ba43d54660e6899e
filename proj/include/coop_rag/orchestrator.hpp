#pragma once

#include "coop_rag/clock.hpp"
#include "coop_rag/generation.hpp"
#include "coop_rag/index.hpp"
#include "coop_rag/lexicon.hpp"
#include "coop_rag/prompt.hpp"
#include "coop_rag/query.hpp"
#include "coop_rag/retrieval.hpp"
#include "coop_rag/session.hpp"
#include "coop_rag/vision.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coop_rag {

inline constexpr std::string_view kDefaultClarification =
    "This assistant covers poultry topics; please rephrase your question to specify the poultry species or topic.";

struct PipelineConfig {
  RetrievalConfig retrieval;
  double ood_threshold = 0.35;
  std::size_t history_window = kDefaultHistoryWindow;
  std::string clarification_message{kDefaultClarification};
  std::size_t min_correction_length = 5;
};

/// Everything handle_chat needs. Pointers are non-owning and must outlive
/// the call; `vision` may be null.
struct PipelineDeps {
  const SharedIndex *index = nullptr;
  const Embedder *embedder = nullptr;
  const Generator *generator = nullptr;
  const VisionBackend *vision = nullptr;
  const DomainLexicon *lexicon = nullptr;
  SessionStore *sessions = nullptr;
  std::shared_ptr<const Clock> clock = system_clock();
  PipelineConfig config;
};

struct ChatRequest {
  std::optional<std::string> session_id;
  std::string message;
  // Raw image bytes.
  std::optional<std::string> image;
  std::optional<ResponseStyle> style;
};

struct Answer {
  std::string session_id;
  std::size_t turn_index = 0;
  // Generated text followed by the citation footer.
  std::string text;
  // Generated text alone.
  std::string generated;
  std::vector<Citation> citations;
  std::vector<std::string> contexts_used;
  std::vector<RetrievedContext> contexts;
  PreparedQuery prepared;
  bool ood = false;
  std::int64_t latency_ms = 0;
  ResponseStyle style = ResponseStyle::concise;
  std::vector<std::string> warnings;
};

Answer handle_chat(const ChatRequest &request, const PipelineDeps &deps);

// Generation from the question alone: empty history, no contexts.
std::string generate_baseline(std::string_view question, ResponseStyle style, const Generator &generator);

} // namespace coop_rag
