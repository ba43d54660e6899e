#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

struct Document {
  std::string doc_id;
  std::string title;
  std::string source;
  std::optional<std::string> publication_date; // YYYY-MM-DD
  std::vector<std::string> topics;
  std::string body;
  // Carried through to chunk metadata; not used by any scoring stage.
  std::optional<double> relevance_score;
};

struct ChunkMetadata {
  std::string title;
  std::string source;
  std::optional<std::string> publication_date;
  std::vector<std::string> topics;
  std::optional<double> relevance_score;

  bool operator==(const ChunkMetadata &) const = default;
};

/// Half-open range of Unicode scalar offsets into a document body.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t length() const noexcept { return end - start; }
  bool operator==(const CharSpan &) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::size_t ordinal = 0;
  std::string text;
  CharSpan span;
  ChunkMetadata metadata;

  bool operator==(const Chunk &) const = default;
};

struct ChunkConfig {
  std::size_t max_chars = 800;
  std::size_t overlap_chars = 80;
  std::vector<std::string> separators{"\n\n", "\n", ". ", " ", ""};

  // Throws Error(invalid_argument) when the invariants do not hold.
  void validate() const;
};

enum class CorpusFormat { jsonl, text_dir };

// Documents sorted by doc_id. JSONL errors report the 1-based line number.
std::vector<Document> load_corpus(const std::filesystem::path &path, CorpusFormat format);
// Picks text_dir for directories and jsonl otherwise.
std::vector<Document> load_corpus(const std::filesystem::path &path);
std::vector<Document> parse_corpus_jsonl(std::string_view content);

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal);

std::vector<Chunk> split_into_chunks(const Document &doc, const ChunkConfig &cfg);
Chunk attach_metadata(Chunk chunk, const Document &doc);

// split_into_chunks followed by attach_metadata, for every document.
std::vector<Chunk> chunk_documents(const std::vector<Document> &docs, const ChunkConfig &cfg);

} // namespace coop_rag
