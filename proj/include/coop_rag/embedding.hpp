#pragma once

#include "coop_rag/backend.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

/// Fixed-length embedding. Vectors produced by an Embedder are unit-norm.
class EmbeddingVector {
public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {}

  // Scales `values` to unit L2 norm. Throws on a zero vector.
  static EmbeddingVector normalized(std::span<const double> values);
  static EmbeddingVector normalized(std::span<const float> values);

  [[nodiscard]] std::size_t dims() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const float> values() const noexcept { return values_; }
  [[nodiscard]] double norm() const noexcept;

  bool operator==(const EmbeddingVector &) const = default;

private:
  std::vector<float> values_;
};

double dot(std::span<const float> a, std::span<const float> b) noexcept;

/// dot(a,b) / (|a| |b|). Throws on dimension mismatch or a zero-norm input.
double cosine_similarity(const EmbeddingVector &a, const EmbeddingVector &b);
double cosine_similarity(std::span<const float> a, std::span<const float> b);

enum class EmbedderKind { deterministic_hash, remote_http };

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::deterministic_hash;
  std::size_t dims = 1536;
  std::optional<RemoteEndpoint> remote;

  void validate() const;
  // Identifies the embedding function; stored in index manifests.
  [[nodiscard]] std::string fingerprint() const;
};

class Embedder {
public:
  virtual ~Embedder() = default;

  // Throws Error(empty_text) for blank input.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  // Order-preserving; a blank element aborts the batch naming its index.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

  [[nodiscard]] virtual std::size_t dims() const noexcept = 0;
  [[nodiscard]] virtual std::string fingerprint() const = 0;
  [[nodiscard]] virtual BackendStatus status() const noexcept = 0;
  virtual void probe() const {}
};

/// Character 3-gram feature hashing: lowercase, collapse whitespace, hash
/// each 3-gram with MurmurHash64A (seed 0) into `dims` buckets, count, and
/// L2-normalize. Texts shorter than three characters hash as one gram.
class HashEmbedder final : public Embedder {
public:
  explicit HashEmbedder(std::size_t dims = 1536);

  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::size_t dims() const noexcept override { return dims_; }
  std::string fingerprint() const override;
  BackendStatus status() const noexcept override { return BackendStatus::stub; }

  // Text normalization and gram extraction exposed for tests.
  static std::string normalize(std::string_view text);
  static std::vector<std::string> grams(std::string_view normalized);

private:
  std::size_t dims_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec &spec);

EmbeddingVector embed_text(std::string_view text, const EmbedderSpec &spec);
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbedderSpec &spec);

} // namespace coop_rag
