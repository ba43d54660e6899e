#pragma once

#include "coop_rag/prepared_query.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coop_rag {

/// Domain vocabulary for spelling correction, abbreviation expansion and
/// keyword tagging. Immutable after construction.
class DomainLexicon {
public:
  DomainLexicon() = default;

  // Keywords must be single lowercase tokens. A term listed under several
  // facets keeps the first facet in kAllFacets order.
  DomainLexicon(const std::map<Facet, std::vector<std::string>> &keywords,
                std::map<std::string, std::string> abbreviations, std::size_t max_edit_distance = 1);

  static DomainLexicon builtin();
  static DomainLexicon from_json(std::string_view json_text);
  static DomainLexicon load(const std::filesystem::path &path);

  [[nodiscard]] std::optional<Facet> facet_of(std::string_view token) const;
  [[nodiscard]] bool is_keyword(std::string_view token) const { return facet_of(token).has_value(); }
  // Expansion phrase for an uppercase key.
  [[nodiscard]] const std::string *expansion_of(std::string_view upper_token) const;

  [[nodiscard]] const std::vector<std::string> &keywords(Facet f) const;
  [[nodiscard]] const std::vector<std::string> &all_keywords() const noexcept { return ordered_; }
  [[nodiscard]] const std::map<std::string, std::string> &abbreviations() const noexcept { return abbreviations_; }
  [[nodiscard]] std::size_t max_edit_distance() const noexcept { return max_edit_distance_; }

private:
  std::map<Facet, std::vector<std::string>> by_facet_;
  std::unordered_map<std::string, Facet> facet_by_term_;
  std::vector<std::string> ordered_;
  std::map<std::string, std::string> abbreviations_;
  std::size_t max_edit_distance_ = 1;
};

std::size_t levenshtein(std::string_view a, std::string_view b);

} // namespace coop_rag
