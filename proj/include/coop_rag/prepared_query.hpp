#pragma once

#include "coop_rag/embedding.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coop_rag {

enum class QueryCategory { diagnosis, nutrition, reproduction, management, other };

enum class Facet { species, disease, management_topic, nutrition_topic, reproduction_topic };

inline constexpr Facet kAllFacets[] = {Facet::species, Facet::disease, Facet::management_topic,
                                       Facet::nutrition_topic, Facet::reproduction_topic};

std::string_view to_string(QueryCategory c) noexcept;
std::string_view to_string(Facet f) noexcept;
std::optional<Facet> parse_facet(std::string_view name) noexcept;

struct KeywordHit {
  std::string token;
  Facet facet;

  bool operator==(const KeywordHit &) const = default;
};

using TokenPair = std::pair<std::string, std::string>;

struct PreparedQuery {
  std::string raw_text;
  // Tokens after correction, with expansion tokens appended.
  std::vector<std::string> normalized_tokens;
  std::vector<TokenPair> corrections;
  std::vector<TokenPair> expansions;
  std::vector<KeywordHit> keywords;
  QueryCategory category = QueryCategory::other;
  std::optional<std::string> image_caption;
  bool ood_flag = false;
  double preview_max_fused = 0.0;
  std::string fused_text;
  EmbeddingVector embedding;
  std::vector<std::string> warnings;

  // Terms used for BM25: normalized tokens plus caption tokens.
  [[nodiscard]] std::vector<std::string> search_tokens() const;
  // Distinct keyword tokens in first-seen order.
  [[nodiscard]] std::vector<std::string> keyword_tokens() const;
};

} // namespace coop_rag
