#include "coop_rag/query.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace coop_rag {

namespace {

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool contains_sequence(const std::vector<std::string> &haystack, const std::vector<std::string> &needle) {
  if (needle.empty()) {
    return true;
  }
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

} // namespace

std::vector<std::string> normalize_query(std::string_view text) { return tokenize(text); }

CorrectionResult correct_spelling(std::vector<std::string> tokens, const DomainLexicon &lexicon,
                                  std::size_t min_length) {
  CorrectionResult out;
  const auto max_d = lexicon.max_edit_distance();
  for (auto &token : tokens) {
    if (token.size() < min_length || all_digits(token) || lexicon.is_keyword(token) ||
        lexicon.expansion_of(to_upper_ascii(token)) != nullptr) {
      continue;
    }
    const std::string *match = nullptr;
    std::size_t matches = 0;
    for (const auto &kw : lexicon.all_keywords()) {
      const auto diff = kw.size() > token.size() ? kw.size() - token.size() : token.size() - kw.size();
      if (diff > max_d) {
        continue;
      }
      if (levenshtein(token, kw) <= max_d) {
        match = &kw;
        if (++matches > 1) {
          break;
        }
      }
    }
    if (matches == 1) {
      out.corrections.emplace_back(token, *match);
      token = *match;
    }
  }
  out.tokens = std::move(tokens);
  return out;
}

ExpansionResult expand_abbreviations(std::vector<std::string> tokens, const DomainLexicon &lexicon) {
  ExpansionResult out;
  const auto original_count = tokens.size();
  for (std::size_t i = 0; i < original_count; ++i) {
    const auto key = to_upper_ascii(tokens[i]);
    const auto *expansion = lexicon.expansion_of(key);
    if (expansion == nullptr) {
      continue;
    }
    const auto extra = tokenize(*expansion);
    if (contains_sequence(tokens, extra)) {
      continue;
    }
    tokens.insert(tokens.end(), extra.begin(), extra.end());
    out.expansions.emplace_back(key, *expansion);
  }
  out.tokens = std::move(tokens);
  return out;
}

TaggingResult tag_keywords_and_category(const std::vector<std::string> &tokens, const DomainLexicon &lexicon) {
  TaggingResult out;
  std::unordered_set<std::string> seen;
  bool disease = false, nutrition = false, reproduction = false, management = false;
  for (const auto &t : tokens) {
    const auto facet = lexicon.facet_of(t);
    if (!facet || !seen.insert(t).second) {
      continue;
    }
    out.keywords.push_back({t, *facet});
    disease = disease || *facet == Facet::disease;
    nutrition = nutrition || *facet == Facet::nutrition_topic;
    reproduction = reproduction || *facet == Facet::reproduction_topic;
    management = management || *facet == Facet::management_topic;
  }
  if (disease) {
    out.category = QueryCategory::diagnosis;
  } else if (nutrition) {
    out.category = QueryCategory::nutrition;
  } else if (reproduction) {
    out.category = QueryCategory::reproduction;
  } else if (management) {
    out.category = QueryCategory::management;
  }
  return out;
}

bool detect_out_of_domain(const PreparedQuery &prepared, double preview_max_fused, double threshold) {
  return prepared.keywords.empty() && preview_max_fused < threshold;
}

PreparedQuery prepare_query(std::string_view raw_text, std::optional<std::string_view> image,
                            const QueryDeps &deps, const QueryOptions &opts, RetrievalResult *preview) {
  const bool has_text = !is_blank(raw_text);
  if (!has_text && !image) {
    throw Error(Errc::input_required, "a message or an image is required");
  }

  PreparedQuery q;
  q.raw_text = std::string(raw_text);

  auto corrected = correct_spelling(normalize_query(raw_text), deps.lexicon, opts.min_correction_length);
  q.corrections = std::move(corrected.corrections);
  auto expanded = expand_abbreviations(std::move(corrected.tokens), deps.lexicon);
  q.expansions = std::move(expanded.expansions);
  q.normalized_tokens = std::move(expanded.tokens);

  if (image) {
    if (deps.vision == nullptr) {
      q.warnings.emplace_back("image ignored: no vision backend configured");
    } else {
      try {
        q.image_caption = caption_image(*image, *deps.vision);
      } catch (const Error &e) {
        q.warnings.push_back(std::string("image ignored (") + std::string(to_string(e.code())) + "): " + e.what());
      }
    }
  }
  if (!has_text && !q.image_caption) {
    throw Error(Errc::input_required, "the image could not be described and no message was given");
  }

  // Caption words count as query words for tagging.
  auto tag_tokens = q.normalized_tokens;
  if (q.image_caption) {
    for (auto &t : tokenize(*q.image_caption)) {
      tag_tokens.push_back(std::move(t));
    }
  }
  auto tagged = tag_keywords_and_category(tag_tokens, deps.lexicon);
  q.keywords = std::move(tagged.keywords);
  q.category = tagged.category;

  std::vector<std::string> parts;
  if (has_text) {
    parts.push_back(trim(raw_text));
  }
  for (const auto &[abbrev, phrase] : q.expansions) {
    parts.push_back(phrase);
  }
  if (q.image_caption) {
    parts.push_back(*q.image_caption);
  }
  q.fused_text = join(parts, " ");
  q.embedding = deps.embedder.embed(q.fused_text);

  auto result = retrieve(q, deps.index, opts.retrieval);
  q.preview_max_fused = result.pool_stats.max_fused;
  q.ood_flag = detect_out_of_domain(q, q.preview_max_fused, opts.ood_threshold);
  if (preview != nullptr) {
    *preview = std::move(result);
  }
  return q;
}

} // namespace coop_rag
