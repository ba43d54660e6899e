#pragma once

#include "coop_rag/embedding.hpp"
#include "coop_rag/index.hpp"
#include "coop_rag/lexicon.hpp"
#include "coop_rag/prepared_query.hpp"
#include "coop_rag/retrieval.hpp"
#include "coop_rag/vision.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

struct QueryOptions {
  RetrievalConfig retrieval;
  double ood_threshold = 0.35;
  // Tokens shorter than this are never spell-corrected.
  std::size_t min_correction_length = 5;
};

std::vector<std::string> normalize_query(std::string_view text);

struct CorrectionResult {
  std::vector<std::string> tokens;
  std::vector<TokenPair> corrections;
};
CorrectionResult correct_spelling(std::vector<std::string> tokens, const DomainLexicon &lexicon,
                                  std::size_t min_length = 5);

struct ExpansionResult {
  std::vector<std::string> tokens;
  // (uppercase abbreviation, expansion phrase)
  std::vector<TokenPair> expansions;
};
ExpansionResult expand_abbreviations(std::vector<std::string> tokens, const DomainLexicon &lexicon);

struct TaggingResult {
  std::vector<KeywordHit> keywords;
  QueryCategory category = QueryCategory::other;
};
TaggingResult tag_keywords_and_category(const std::vector<std::string> &tokens, const DomainLexicon &lexicon);

bool detect_out_of_domain(const PreparedQuery &prepared, double preview_max_fused, double threshold);

struct QueryDeps {
  const DomainLexicon &lexicon;
  const Embedder &embedder;
  const KnowledgeIndex &index;
  const VisionBackend *vision = nullptr;
};

// Full preparation including the preview retrieval that feeds the OOD flag.
// The preview result is written to `preview` when given, so callers can reuse
// it instead of retrieving twice.
PreparedQuery prepare_query(std::string_view raw_text, std::optional<std::string_view> image,
                            const QueryDeps &deps, const QueryOptions &opts,
                            RetrievalResult *preview = nullptr);

} // namespace coop_rag
