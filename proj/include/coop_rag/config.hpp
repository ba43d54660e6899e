#pragma once

#include "coop_rag/corpus.hpp"
#include "coop_rag/embedding.hpp"
#include "coop_rag/generation.hpp"
#include "coop_rag/index.hpp"
#include "coop_rag/orchestrator.hpp"
#include "coop_rag/retrieval.hpp"
#include "coop_rag/vision.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  // Defaults to data_dir / "index".
  std::optional<std::filesystem::path> index_dir;

  ChunkConfig chunking;
  RetrievalConfig retrieval;
  Bm25Params bm25;
  EmbedderSpec embedder;
  GenerationSpec generation;
  VisionSpec vision;
  std::optional<std::filesystem::path> lexicon_path;

  double ood_threshold = 0.35;
  std::size_t history_window = kDefaultHistoryWindow;
  std::string clarification_message{kDefaultClarification};

  std::size_t max_body_bytes = 8 * 1024 * 1024;
  std::size_t max_image_base64_bytes = 5 * 1024 * 1024;

  bool ingestion_enabled = false;
  std::vector<std::string> cors_origins{"*"};
  // Name of the env var holding the API bearer token; empty disables auth.
  std::string auth_token_env;
  int threads = 8;
  int probe_interval_s = 30;

  void validate() const;
  [[nodiscard]] std::filesystem::path resolved_index_dir() const;
  [[nodiscard]] PipelineConfig pipeline() const;
};

// Unknown keys anywhere in the document are rejected with Error(config_error).
ServiceConfig parse_config(std::string_view json_text);
ServiceConfig load_config(const std::filesystem::path &path);
// --config path if given, else $COOP_RAG_CONFIG, else defaults.
ServiceConfig resolve_config(const std::optional<std::filesystem::path> &explicit_path);
std::string config_to_json(const ServiceConfig &cfg);

inline constexpr const char *kConfigEnvVar = "COOP_RAG_CONFIG";

} // namespace coop_rag
