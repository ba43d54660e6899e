#pragma once

#include "coop_rag/corpus.hpp"
#include "coop_rag/embedding.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coop_rag {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct IndexManifest {
  std::size_t dims = 0;
  std::size_t chunk_count = 0;
  Bm25Params bm25;
  double avg_doc_len = 0.0;
  std::string created_at;
  std::string embedder_fingerprint;
};

enum class HitKind { semantic, lexical };

struct ScoredHit {
  std::string chunk_ref;
  double score = 0.0;
  HitKind kind = HitKind::semantic;

  bool operator==(const ScoredHit &) const = default;
};

struct Posting {
  std::uint32_t row;
  std::uint32_t tf;
};

/// Exact-scan vector store plus BM25 inverted index over chunks.
///
/// Const member functions may run concurrently; mutation requires exclusive
/// access. Use SharedIndex for copy-on-write snapshots under concurrent
/// readers and writers.
class KnowledgeIndex {
public:
  explicit KnowledgeIndex(std::size_t dims, std::string embedder_fingerprint = {},
                          Bm25Params bm25 = {});

  // Re-upserting an existing chunk_id replaces it in place.
  std::size_t upsert_chunks(std::span<const Chunk> chunks, std::span<const EmbeddingVector> vectors);

  // Top-n by cosine descending, ties by ascending chunk_id.
  std::vector<ScoredHit> vector_search(const EmbeddingVector &query, std::size_t n) const;

  // Sum over distinct query terms of IDF * saturated tf; 0 when no term hits.
  double bm25_score(std::span<const std::string> query_tokens, std::string_view chunk_ref) const;

  // Top-n chunks with positive BM25, ties by ascending chunk_id.
  std::vector<ScoredHit> lexical_search(std::span<const std::string> query_tokens, std::size_t n) const;

  // Cosine between `query` and a stored chunk vector.
  double semantic_similarity(const EmbeddingVector &query, std::string_view chunk_ref) const;

  IndexManifest save(const std::filesystem::path &dir) const;
  static KnowledgeIndex load(const std::filesystem::path &dir,
                             std::optional<std::size_t> expected_dims = std::nullopt);

  [[nodiscard]] IndexManifest manifest() const;
  [[nodiscard]] std::size_t size() const noexcept { return chunks_.size(); }
  [[nodiscard]] bool empty() const noexcept { return chunks_.empty(); }
  [[nodiscard]] std::size_t dims() const noexcept { return dims_; }
  [[nodiscard]] bool contains(std::string_view chunk_ref) const;

  // Throws Error(not_found) for unknown ids.
  const Chunk &chunk(std::string_view chunk_ref) const;
  const EmbeddingVector &embedding(std::string_view chunk_ref) const;

  [[nodiscard]] const std::vector<Chunk> &chunks() const noexcept { return chunks_; }
  // Posting list for `term`, sorted by row; empty when the term is unknown.
  std::span<const Posting> postings(std::string_view term) const;
  [[nodiscard]] std::size_t doc_length(std::string_view chunk_ref) const;

private:
  std::size_t row_of(std::string_view chunk_ref) const;
  void index_row(std::uint32_t row);
  void unindex_row(std::uint32_t row);
  void recompute_avg();
  double idf(std::size_t df) const noexcept;
  double term_weight(double idf, std::uint32_t tf, std::uint32_t len) const noexcept;
  std::vector<std::string> distinct_terms(std::span<const std::string> tokens) const;

  std::size_t dims_;
  std::string fingerprint_;
  Bm25Params bm25_;
  std::string created_at_;

  std::vector<Chunk> chunks_;
  std::vector<EmbeddingVector> vectors_;
  std::vector<double> norms_;
  std::vector<std::uint32_t> doc_len_;
  std::unordered_map<std::string, std::uint32_t> row_by_id_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_doc_len_ = 0.0;
};

/// Copy-on-write holder: readers take immutable snapshots, writers build a
/// modified copy and swap it in atomically.
class SharedIndex {
public:
  explicit SharedIndex(std::shared_ptr<const KnowledgeIndex> initial)
      : current_(std::move(initial)) {}

  [[nodiscard]] std::shared_ptr<const KnowledgeIndex> snapshot() const {
    std::lock_guard lock(mutex_);
    return current_;
  }

  void replace(std::shared_ptr<const KnowledgeIndex> next) {
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
  }

  // Serializes writers; `mutate` receives a private copy of the current index.
  template <typename F>
  auto update(F &&mutate) {
    std::lock_guard writer(writer_mutex_);
    auto next = std::make_shared<KnowledgeIndex>(*snapshot());
    auto result = mutate(*next);
    replace(std::move(next));
    return result;
  }

private:
  mutable std::mutex mutex_;
  std::mutex writer_mutex_;
  std::shared_ptr<const KnowledgeIndex> current_;
};

} // namespace coop_rag
