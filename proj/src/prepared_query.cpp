#include "coop_rag/prepared_query.hpp"

#include "coop_rag/text.hpp"

#include <unordered_set>

namespace coop_rag {

std::string_view to_string(QueryCategory c) noexcept {
  switch (c) {
    case QueryCategory::diagnosis: return "diagnosis";
    case QueryCategory::nutrition: return "nutrition";
    case QueryCategory::reproduction: return "reproduction";
    case QueryCategory::management: return "management";
    case QueryCategory::other: return "other";
  }
  return "other";
}

std::string_view to_string(Facet f) noexcept {
  switch (f) {
    case Facet::species: return "species";
    case Facet::disease: return "disease";
    case Facet::management_topic: return "management_topic";
    case Facet::nutrition_topic: return "nutrition_topic";
    case Facet::reproduction_topic: return "reproduction_topic";
  }
  return "species";
}

std::optional<Facet> parse_facet(std::string_view name) noexcept {
  for (const auto f : kAllFacets) {
    if (to_string(f) == name) {
      return f;
    }
  }
  return std::nullopt;
}

std::vector<std::string> PreparedQuery::search_tokens() const {
  auto out = normalized_tokens;
  if (image_caption) {
    for (auto &t : tokenize(*image_caption)) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<std::string> PreparedQuery::keyword_tokens() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto &k : keywords) {
    if (seen.insert(k.token).second) {
      out.push_back(k.token);
    }
  }
  return out;
}

} // namespace coop_rag
