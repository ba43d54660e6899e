#pragma once

#include "coop_rag/index.hpp"
#include "coop_rag/prepared_query.hpp"

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace coop_rag {

struct RetrievalConfig {
  double alpha = 0.70;
  std::size_t k = 6;
  double lambda = 0.3;
  std::size_t pool_size = 50;
  double boost_per_keyword = 0.05;
  double boost_cap = 0.15;

  void validate() const;
};

struct RetrievalCandidate {
  std::string chunk_ref;
  double semantic_sim = 0.0;
  double lexical_raw = 0.0;
  double lexical_norm = 0.0;
  double fused = 0.0;
  double boosted = 0.0;
  std::size_t keyword_matches = 0;
  std::optional<double> mmr_final;
  std::optional<std::size_t> selected_rank;

  bool operator==(const RetrievalCandidate &) const = default;
};

struct RetrievedContext {
  Chunk chunk;
  RetrievalCandidate candidate;

  bool operator==(const RetrievedContext &) const = default;
};

struct PoolStats {
  std::size_t pool_size_actual = 0;
  double mean_semantic_sim = 0.0;
  double mean_fused = 0.0;
  double max_fused = 0.0;

  bool operator==(const PoolStats &) const = default;
};

struct RetrievalResult {
  // Selection order.
  std::vector<RetrievedContext> contexts;
  // Every pool member, by ascending chunk_ref.
  std::vector<RetrievalCandidate> pool;
  PoolStats pool_stats;

  bool operator==(const RetrievalResult &) const = default;
};

// Min-max over the given hits; all-equal scores map to 0.5.
std::unordered_map<std::string, double> normalize_lexical(std::span<const ScoredHit> hits);

double fuse_scores(double semantic_sim, double lexical_norm, double alpha);

RetrievalCandidate keyword_boost(RetrievalCandidate candidate, const Chunk &chunk,
                                 std::span<const std::string> query_keywords, const RetrievalConfig &cfg);

struct MmrCandidate {
  std::string chunk_ref;
  double score = 0.0;
  const EmbeddingVector *vector = nullptr;
};

struct MmrPick {
  std::string chunk_ref;
  double final_score = 0.0;

  bool operator==(const MmrPick &) const = default;
};

// Greedy selection maximizing score - lambda * max cosine to already picked
// items. Ties go to the smaller chunk_ref.
std::vector<MmrPick> mmr_select(std::span<const MmrCandidate> candidates, std::size_t k, double lambda);

RetrievalResult retrieve(const PreparedQuery &query, const KnowledgeIndex &index, const RetrievalConfig &cfg);

RetrievalResult retrieve(const EmbeddingVector &query_vec, std::span<const std::string> query_tokens,
                         std::span<const std::string> keywords, const KnowledgeIndex &index,
                         const RetrievalConfig &cfg);

} // namespace coop_rag
