#include "coop_rag/error.hpp"
#include "coop_rag/retrieval.hpp"
#include "coop_rag/text.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <set>

using namespace coop_rag;
using Catch::Matchers::WithinAbs;
using testutil::make_chunk;

namespace {

EmbeddingVector basis(std::size_t dims, std::size_t i) {
  std::vector<float> v(dims, 0.0f);
  v[i] = 1.0f;
  return EmbeddingVector(std::move(v));
}

RetrievalCandidate with_fused(double fused) {
  RetrievalCandidate c;
  c.chunk_ref = "c";
  c.fused = fused;
  c.boosted = fused;
  return c;
}

} // namespace

TEST_CASE("RetrievalConfig defaults and validation") {
  RetrievalConfig cfg;
  CHECK(cfg.alpha == 0.70);
  CHECK(cfg.k == 6);
  CHECK(cfg.lambda == 0.3);
  CHECK(cfg.pool_size == 50);
  CHECK(cfg.boost_per_keyword == 0.05);
  CHECK(cfg.boost_cap == 0.15);
  cfg.validate();
  auto bad = cfg;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("normalize_lexical") {
  const std::vector<ScoredHit> hits{{"a", 2.0, HitKind::lexical}, {"b", 4.0, HitKind::lexical},
                                    {"c", 6.0, HitKind::lexical}};
  const auto n = normalize_lexical(hits);
  CHECK(n.at("a") == 0.0);
  CHECK(n.at("b") == 0.5);
  CHECK(n.at("c") == 1.0);

  const std::vector<ScoredHit> same{{"a", 3.7, HitKind::lexical}, {"b", 3.7, HitKind::lexical}};
  const auto s = normalize_lexical(same);
  CHECK(s.at("a") == 0.5);
  CHECK(s.at("b") == 0.5);

  CHECK(normalize_lexical(std::vector<ScoredHit>{}).empty());
}

TEST_CASE("fuse_scores") {
  CHECK_THAT(fuse_scores(0.8, 0.5, 0.70), WithinAbs(0.71, 1e-12));
  CHECK(fuse_scores(0.42, 0.9, 1.0) == 0.42);
  CHECK(fuse_scores(-0.3, 0.9, 1.0) == 0.0);
  CHECK(fuse_scores(0.0, 0.0, 0.37) == 0.0);
  CHECK_THROWS_AS(fuse_scores(0.5, 0.5, 1.01), Error);
}

TEST_CASE("fuse_scores is monotone in each argument") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), l = u(rng), sem = s(rng), d = u(rng) * 0.1;
    CHECK(fuse_scores(sem + d, l, a) >= fuse_scores(sem, l, a));
    CHECK(fuse_scores(sem, std::min(l + d, 1.0), a) >= fuse_scores(sem, l, a));
    const double f = fuse_scores(sem, l, a);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-12);
  }
}

TEST_CASE("keyword_boost") {
  const RetrievalConfig cfg;
  auto chunk = make_chunk("c", "Coccidiosis in broilers and layers: litter, feed, water.");
  chunk.metadata.topics = {"Disease control"};
  SECTION("no match leaves the score alone") {
    const std::vector<std::string> kw{"quail"};
    const auto c = keyword_boost(with_fused(0.6), chunk, kw, cfg);
    CHECK(c.boosted == 0.6);
    CHECK(c.keyword_matches == 0);
  }
  SECTION("two distinct matches") {
    const std::vector<std::string> kw{"broilers", "Coccidiosis", "broilers"};
    const auto c = keyword_boost(with_fused(0.6), chunk, kw, cfg);
    CHECK_THAT(c.boosted, WithinAbs(0.70, 1e-12));
    CHECK(c.keyword_matches == 2);
  }
  SECTION("cap binds at five matches") {
    const std::vector<std::string> kw{"broilers", "layers", "litter", "feed", "water"};
    const auto c = keyword_boost(with_fused(0.6), chunk, kw, cfg);
    CHECK_THAT(c.boosted, WithinAbs(0.75, 1e-12));
  }
  SECTION("topics count and matching is whole-token") {
    const std::vector<std::string> kw{"disease", "broil"};
    const auto c = keyword_boost(with_fused(0.6), chunk, kw, cfg);
    CHECK(c.keyword_matches == 1);
  }
  SECTION("never exceeds one") {
    const std::vector<std::string> kw{"broilers", "layers", "litter"};
    CHECK(keyword_boost(with_fused(0.95), chunk, kw, cfg).boosted == 1.0);
  }
}

TEST_CASE("boosting preserves order among equal match counts") {
  const RetrievalConfig cfg;
  const auto chunk = make_chunk("c", "broiler feed water");
  const std::vector<std::string> kw{"broiler", "feed"};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.8);
  for (int i = 0; i < 500; ++i) {
    double a = u(rng), b = u(rng);
    if (a == b) {
      continue;
    }
    if (a < b) {
      std::swap(a, b);
    }
    CHECK(keyword_boost(with_fused(a), chunk, kw, cfg).boosted > keyword_boost(with_fused(b), chunk, kw, cfg).boosted);
  }
}

TEST_CASE("mmr_select worked example") {
  const std::vector<EmbeddingVector> v{basis(8, 0), basis(8, 0), basis(8, 1), basis(8, 2), basis(8, 3)};
  const std::vector<MmrCandidate> cands{
      {"1", 0.9, &v[0]}, {"2", 0.89, &v[1]}, {"3", 0.7, &v[2]}, {"4", 0.6, &v[3]}, {"5", 0.5, &v[4]}};
  const auto picks = mmr_select(cands, 3, 0.3);
  REQUIRE(picks.size() == 3);
  CHECK(picks[0].chunk_ref == "1");
  CHECK(picks[1].chunk_ref == "3");
  CHECK(picks[2].chunk_ref == "4");
  CHECK(picks[0].final_score == 0.9);
  CHECK_THAT(picks[1].final_score, WithinAbs(0.7, 1e-12));

  // Fourth round: #2 carries the full duplicate penalty.
  const auto four = mmr_select(cands, 4, 0.3);
  REQUIRE(four.size() == 4);
  CHECK(four[3].chunk_ref == "2");
  CHECK_THAT(four[3].final_score, WithinAbs(0.59, 1e-6));
}

TEST_CASE("mmr_select edge cases") {
  CHECK(mmr_select(std::vector<MmrCandidate>{}, 6, 0.3).empty());
  const auto e = basis(4, 0);
  const std::vector<MmrCandidate> cands{{"b", 0.5, &e}, {"a", 0.5, &e}, {"c", 0.9, &e}};
  SECTION("lambda zero is plain top-k with id tie-break") {
    const auto picks = mmr_select(cands, 3, 0.0);
    REQUIRE(picks.size() == 3);
    CHECK(picks[0].chunk_ref == "c");
    CHECK(picks[1].chunk_ref == "a");
    CHECK(picks[2].chunk_ref == "b");
  }
  SECTION("k larger than the pool") {
    CHECK(mmr_select(cands, 10, 0.3).size() == 3);
  }
  SECTION("bad lambda") {
    CHECK_THROWS_AS(mmr_select(cands, 2, 1.5), Error);
  }
}

TEST_CASE("mmr_select matches the brute-force greedy oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lambdas[] = {0.0, 0.3, 0.7, 1.0};
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t dims = 2 + rng() % 6;
    const std::size_t k = 1 + rng() % 8;
    const double lambda = lambdas[trial % 4];
    std::vector<EmbeddingVector> vecs;
    std::vector<oracle::MmrItem> items;
    for (std::size_t i = 0; i < n; ++i) {
      const auto raw = testutil::random_unit(rng, dims);
      vecs.emplace_back(raw);
      items.push_back({"c" + std::to_string(i), u(rng), std::vector<double>(raw.begin(), raw.end())});
    }
    std::vector<MmrCandidate> cands;
    for (std::size_t i = 0; i < n; ++i) {
      cands.push_back({items[i].id, items[i].score, &vecs[i]});
    }
    const auto picks = mmr_select(cands, k, lambda);
    const auto expected = oracle::mmr_greedy(items, k, lambda);
    REQUIRE(picks.size() == expected.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < picks.size(); ++i) {
      CHECK(picks[i].chunk_ref == expected[i]);
      seen.insert(picks[i].chunk_ref);
    }
    CHECK(seen.size() == picks.size());
    const auto top = std::max_element(items.begin(), items.end(),
                                      [](const auto &a, const auto &b) { return a.score < b.score; });
    CHECK(picks[0].chunk_ref == top->id);
  }
}

TEST_CASE("retrieve") {
  const HashEmbedder e(256);
  const RetrievalConfig cfg;
  SECTION("single chunk index") {
    const auto idx = testutil::build_index({make_chunk("only", "broiler water intake")}, e);
    const std::vector<std::string> toks{"water"};
    const auto r = retrieve(e.embed("water"), toks, {}, idx, cfg);
    REQUIRE(r.contexts.size() == 1);
    CHECK(r.contexts[0].chunk.chunk_id == "only");
    CHECK(r.contexts[0].candidate.selected_rank == std::optional<std::size_t>(0));
  }
  SECTION("pool exhaustion") {
    const auto idx = testutil::build_index({make_chunk("a", "broiler feed"), make_chunk("b", "layer lighting"),
                                            make_chunk("c", "duck pond water"), make_chunk("d", "turkey poults")},
                                           e);
    const std::vector<std::string> toks{"broiler"};
    const auto r = retrieve(e.embed("broiler"), toks, {}, idx, cfg);
    CHECK(r.contexts.size() == 4);
    CHECK(r.pool.size() == 4);
    CHECK(r.pool_stats.pool_size_actual == 4);
  }
  SECTION("empty index") {
    const KnowledgeIndex idx(256);
    try {
      retrieve(e.embed("x y z"), std::vector<std::string>{"x"}, {}, idx, cfg);
      FAIL("expected index_empty");
    } catch (const Error &err) {
      CHECK(err.code() == Errc::index_empty);
    }
  }
  SECTION("dimension mismatch") {
    const auto idx = testutil::build_index({make_chunk("a", "broiler feed")}, e);
    CHECK_THROWS_AS(retrieve(HashEmbedder(64).embed("broiler"), std::vector<std::string>{"broiler"}, {}, idx, cfg),
                    Error);
  }
}

TEST_CASE("retrieve candidate ledger invariants on the fixture") {
  const HashEmbedder e;
  const auto idx = testutil::fixture_index(e);
  const RetrievalConfig cfg;
  for (const auto &r : testutil::fixture_truth()) {
    const auto toks = tokenize(r.question);
    const auto res = retrieve(e.embed(r.question), toks, toks, idx, cfg);
    CHECK(res.contexts.size() == std::min<std::size_t>(cfg.k, idx.size()));
    std::set<std::string> refs;
    for (const auto &c : res.pool) {
      CHECK_THAT(c.fused, WithinAbs(cfg.alpha * std::max(c.semantic_sim, 0.0) + (1 - cfg.alpha) * c.lexical_norm,
                                    1e-12));
      CHECK(c.boosted >= c.fused);
      CHECK(c.boosted - c.fused <= cfg.boost_cap + 1e-12);
      CHECK(c.lexical_norm >= 0.0);
      CHECK(c.lexical_norm <= 1.0);
      CHECK_THAT(c.semantic_sim, WithinAbs(idx.semantic_similarity(e.embed(r.question), c.chunk_ref), 1e-9));
    }
    for (const auto &c : res.contexts) {
      CHECK(refs.insert(c.chunk.chunk_id).second);
    }
    CHECK(retrieve(e.embed(r.question), toks, toks, idx, cfg) == res);
  }
}

TEST_CASE("single-signal argmax at the alpha boundaries") {
  const HashEmbedder e;
  const auto idx = testutil::fixture_index(e);
  RetrievalConfig cfg;
  cfg.boost_per_keyword = 0.0;
  for (const auto &r : testutil::fixture_truth()) {
    const auto toks = tokenize(r.question);
    const auto qv = e.embed(r.question);
    cfg.alpha = 1.0;
    const auto sem = retrieve(qv, toks, toks, idx, cfg);
    CHECK(sem.contexts[0].chunk.chunk_id == idx.vector_search(qv, 1)[0].chunk_ref);
    cfg.alpha = 0.0;
    const auto lex_hits = idx.lexical_search(toks, 1);
    if (!lex_hits.empty()) {
      const auto lex = retrieve(qv, toks, toks, idx, cfg);
      CHECK(lex.contexts[0].chunk.chunk_id == lex_hits[0].chunk_ref);
    }
  }
}
