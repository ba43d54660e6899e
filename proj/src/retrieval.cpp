#include "coop_rag/retrieval.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_set>

namespace coop_rag {

namespace {

void require_unit_range(double v, const char *name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(Errc::invalid_argument, std::string(name) + " must be in [0, 1], got " + std::to_string(v));
  }
}

} // namespace

void RetrievalConfig::validate() const {
  require_unit_range(alpha, "alpha");
  require_unit_range(lambda, "lambda");
  if (k == 0) {
    throw Error(Errc::invalid_argument, "k must be positive");
  }
  if (pool_size == 0) {
    throw Error(Errc::invalid_argument, "pool_size must be positive");
  }
  if (!(boost_per_keyword >= 0.0) || !(boost_cap >= 0.0)) {
    throw Error(Errc::invalid_argument, "boost_per_keyword and boost_cap must be non-negative");
  }
}

std::unordered_map<std::string, double> normalize_lexical(std::span<const ScoredHit> hits) {
  std::unordered_map<std::string, double> out;
  if (hits.empty()) {
    return out;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto &h : hits) {
    lo = std::min(lo, h.score);
    hi = std::max(hi, h.score);
  }
  for (const auto &h : hits) {
    out[h.chunk_ref] = hi == lo ? 0.5 : (h.score - lo) / (hi - lo);
  }
  return out;
}

double fuse_scores(double semantic_sim, double lexical_norm, double alpha) {
  require_unit_range(alpha, "alpha");
  return alpha * std::max(semantic_sim, 0.0) + (1.0 - alpha) * lexical_norm;
}

RetrievalCandidate keyword_boost(RetrievalCandidate candidate, const Chunk &chunk,
                                 std::span<const std::string> query_keywords, const RetrievalConfig &cfg) {
  std::unordered_set<std::string> chunk_terms;
  for (auto &t : tokenize(chunk.text)) {
    chunk_terms.insert(std::move(t));
  }
  for (const auto &topic : chunk.metadata.topics) {
    for (auto &t : tokenize(topic)) {
      chunk_terms.insert(std::move(t));
    }
  }
  std::unordered_set<std::string> matched;
  for (const auto &kw : query_keywords) {
    const auto lowered = to_lower_ascii(kw);
    if (chunk_terms.contains(lowered)) {
      matched.insert(lowered);
    }
  }
  const auto m = static_cast<double>(matched.size());
  candidate.keyword_matches = matched.size();
  const double boosted = std::min(candidate.fused + cfg.boost_per_keyword * m, candidate.fused + cfg.boost_cap);
  candidate.boosted = std::min(boosted, 1.0);
  return candidate;
}

std::vector<MmrPick> mmr_select(std::span<const MmrCandidate> candidates, std::size_t k, double lambda) {
  require_unit_range(lambda, "lambda");
  const auto n = candidates.size();
  std::vector<MmrPick> picks;
  if (n == 0 || k == 0) {
    return picks;
  }
  // Only meaningful once something is picked; the first round has no penalty.
  std::vector<double> max_sim(n, -std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  const auto rounds = std::min(k, n);
  picks.reserve(rounds);
  for (std::size_t round = 0; round < rounds; ++round) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        continue;
      }
      const double final_score = candidates[i].score - (round == 0 ? 0.0 : lambda * max_sim[i]);
      if (best == n || final_score > best_score ||
          (final_score == best_score && candidates[i].chunk_ref < candidates[best].chunk_ref)) {
        best = i;
        best_score = final_score;
      }
    }
    taken[best] = true;
    picks.push_back({candidates[best].chunk_ref, best_score});
    if (round + 1 == rounds) {
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) {
        const double sim = cosine_similarity(*candidates[i].vector, *candidates[best].vector);
        max_sim[i] = std::max(max_sim[i], sim);
      }
    }
  }
  return picks;
}

RetrievalResult retrieve(const PreparedQuery &query, const KnowledgeIndex &index, const RetrievalConfig &cfg) {
  const auto tokens = query.search_tokens();
  const auto keywords = query.keyword_tokens();
  return retrieve(query.embedding, tokens, keywords, index, cfg);
}

RetrievalResult retrieve(const EmbeddingVector &query_vec, std::span<const std::string> query_tokens,
                         std::span<const std::string> keywords, const KnowledgeIndex &index,
                         const RetrievalConfig &cfg) {
  cfg.validate();
  if (index.empty()) {
    throw Error(Errc::index_empty, "the knowledge index is empty");
  }

  std::map<std::string, RetrievalCandidate> pool;
  std::unordered_set<std::string> have_semantic;
  for (const auto &hit : index.vector_search(query_vec, cfg.pool_size)) {
    auto &c = pool[hit.chunk_ref];
    c.chunk_ref = hit.chunk_ref;
    c.semantic_sim = hit.score;
    have_semantic.insert(hit.chunk_ref);
  }
  for (const auto &hit : index.lexical_search(query_tokens, cfg.pool_size)) {
    auto &c = pool[hit.chunk_ref];
    c.chunk_ref = hit.chunk_ref;
    c.lexical_raw = hit.score;
  }

  std::vector<ScoredHit> lexical;
  lexical.reserve(pool.size());
  bool any_lexical = false;
  for (auto &[ref, c] : pool) {
    if (!have_semantic.contains(ref)) {
      c.semantic_sim = index.semantic_similarity(query_vec, ref);
    }
    lexical.push_back({ref, c.lexical_raw, HitKind::lexical});
    any_lexical = any_lexical || c.lexical_raw > 0.0;
  }
  // Without a single lexical hit the 0.5 tie rule would lift every chunk
  // equally; treat the lexical signal as absent instead.
  const auto norm = any_lexical ? normalize_lexical(lexical) : std::unordered_map<std::string, double>{};

  RetrievalResult result;
  result.pool.reserve(pool.size());
  std::vector<MmrCandidate> mmr;
  mmr.reserve(pool.size());
  double sum_sem = 0.0;
  double sum_fused = 0.0;
  double max_fused = 0.0;
  for (auto &[ref, c] : pool) {
    const auto it = norm.find(ref);
    c.lexical_norm = it == norm.end() ? 0.0 : it->second;
    c.fused = fuse_scores(c.semantic_sim, c.lexical_norm, cfg.alpha);
    c = keyword_boost(std::move(c), index.chunk(ref), keywords, cfg);
    sum_sem += c.semantic_sim;
    sum_fused += c.fused;
    max_fused = std::max(max_fused, c.fused);
    result.pool.push_back(c);
  }
  for (const auto &c : result.pool) {
    mmr.push_back({c.chunk_ref, c.boosted, &index.embedding(c.chunk_ref)});
  }

  const auto picks = mmr_select(mmr, cfg.k, cfg.lambda);
  std::unordered_map<std::string, std::size_t> pool_pos;
  for (std::size_t i = 0; i < result.pool.size(); ++i) {
    pool_pos.emplace(result.pool[i].chunk_ref, i);
  }
  for (std::size_t rank = 0; rank < picks.size(); ++rank) {
    auto &c = result.pool[pool_pos.at(picks[rank].chunk_ref)];
    c.mmr_final = picks[rank].final_score;
    c.selected_rank = rank;
    result.contexts.push_back({index.chunk(c.chunk_ref), c});
  }

  const auto n = static_cast<double>(result.pool.size());
  result.pool_stats = {result.pool.size(), sum_sem / n, sum_fused / n, max_fused};
  return result;
}

} // namespace coop_rag
