// Acceptance run: one PASS/FAIL line per numbered check, nonzero exit on any
// failure. Each check also has a wall-clock budget.

#include "cli.hpp"

#include "coop_rag/config.hpp"
#include "coop_rag/error.hpp"
#include "coop_rag/orchestrator.hpp"
#include "coop_rag/text.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace coop_rag;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

int run_cli_quiet(const std::vector<std::string> &args) {
  std::istringstream in;
  std::ostringstream out, err;
  const int code = cli::run_cli(args, in, out, err);
  if (code != 0) {
    std::cerr << "coop-rag";
    for (const auto &a : args) {
      std::cerr << ' ' << a;
    }
    std::cerr << " -> " << code << "\n" << err.str();
  }
  return code;
}

std::vector<std::string> corpus_vocabulary(const KnowledgeIndex &idx) {
  std::set<std::string> vocab;
  for (const auto &c : idx.chunks()) {
    for (auto &t : oracle::tokens(c.text)) {
      vocab.insert(std::move(t));
    }
  }
  return {vocab.begin(), vocab.end()};
}

std::string random_words(std::mt19937_64 &rng, const std::vector<std::string> &vocab, std::size_t lo,
                         std::size_t hi) {
  const std::size_t n = lo + rng() % (hi - lo + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += vocab[rng() % vocab.size()];
  }
  return out;
}

struct Pipeline {
  HashEmbedder embedder;
  SharedIndex index{std::make_shared<const KnowledgeIndex>(testutil::fixture_index(embedder))};
  DomainLexicon lexicon = DomainLexicon::builtin();
  std::shared_ptr<const Clock> clock = std::make_shared<FrozenClock>();
  SessionStore sessions{clock};
  testutil::CountingGenerator generator;

  PipelineDeps deps(const Generator *gen = nullptr) {
    PipelineDeps d;
    d.index = &index;
    d.embedder = &embedder;
    d.generator = gen != nullptr ? gen : &generator;
    d.lexicon = &lexicon;
    d.sessions = &sessions;
    d.clock = clock;
    return d;
  }
};

Outcome check_config_defaults() {
  testutil::ScopedEnv env(kConfigEnvVar, "");
  ::unsetenv(kConfigEnvVar);
  std::vector<ServiceConfig> cfgs{ServiceConfig{}, parse_config("{}"), resolve_config(std::nullopt)};
  for (const auto &c : cfgs) {
    const auto p = c.pipeline();
    if (c.retrieval.alpha != 0.70 || c.retrieval.k != 6 || c.chunking.max_chars != 800 ||
        c.chunking.overlap_chars != 80 || c.embedder.dims != 1536 || p.retrieval.alpha != 0.70 ||
        p.retrieval.k != 6) {
      return {false, "defaults differ: " + config_to_json(c)};
    }
  }
  if (HashEmbedder().dims() != 1536 || ChunkConfig{}.max_chars != 800 || ChunkConfig{}.overlap_chars != 80) {
    return {false, "component defaults differ"};
  }
  return {true, "alpha=0.70 k=6 chunk=800/80 dims=1536"};
}

Outcome check_prompt_golden() {
  const std::vector<Chunk> ctx{testutil::make_chunk("eb101#0000", "Broilers drink about twice as much water as feed.",
                                                    "Extension Bulletin 101")};
  const auto b = assemble_prompt({}, ctx, "How much water do broilers drink?", ResponseStyle::concise);
  const auto golden = testutil::read_file(testutil::golden_dir() / "prompt_single_context.txt");
  if (golden.empty()) {
    return {false, "golden file missing"};
  }
  if (b.rendered != golden) {
    const auto diff =
        std::mismatch(golden.begin(), golden.end(), b.rendered.begin(), b.rendered.end()).first - golden.begin();
    return {false, "first difference at byte " + std::to_string(diff)};
  }
  return {true, std::to_string(golden.size()) + " bytes identical"};
}

Outcome check_bm25_oracle() {
  const std::vector<std::string> toy{"broiler feed intake", "layer lighting program", "broiler water consumption"};
  const HashEmbedder e(32);
  std::vector<Chunk> chunks;
  std::vector<std::vector<std::string>> docs;
  for (std::size_t i = 0; i < toy.size(); ++i) {
    chunks.push_back(testutil::make_chunk("c" + std::to_string(i + 1), toy[i]));
    docs.push_back(oracle::tokens(toy[i]));
  }
  const auto idx = testutil::build_index(chunks, e);
  const std::vector<std::string> vocab{"broiler", "feed",        "intake", "layer", "lighting",
                                       "program", "water", "consumption", "duck",  "zinc"};
  std::mt19937_64 rng(31);
  double worst = 0;
  for (int q = 0; q < 20; ++q) {
    std::vector<std::string> query;
    const std::size_t n = 1 + rng() % 5;
    for (std::size_t i = 0; i < n; ++i) {
      query.push_back(vocab[rng() % vocab.size()]);
    }
    const auto expected = oracle::bm25(docs, query);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      worst = std::max(worst, std::abs(idx.bm25_score(query, chunks[i].chunk_id) - expected[i]));
    }
  }
  return {worst <= 1e-9, fmt("20 queries, max abs error %.3g", worst)};
}

Outcome check_mmr_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lambdas[] = {0.0, 0.3, 0.7, 1.0};
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t dims = 2 + rng() % 15;
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
    std::vector<std::string> got;
    for (const auto &p : picks) {
      got.push_back(p.chunk_ref);
    }
    mismatches += got == expected ? 0 : 1;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 1000 trials differ"};
}

// The keyword boost is switched off here: it is a separate additive stage
// and would otherwise move the argmax away from the fused score.
Outcome check_fusion_boundaries() {
  Pipeline p;
  const auto idx = p.index.snapshot();
  const auto vocab = corpus_vocabulary(*idx);
  std::mt19937_64 rng(5);
  std::size_t compared_sem = 0, compared_lex = 0, wrong = 0;
  for (int q = 0; q < 200; ++q) {
    const auto text = random_words(rng, vocab, 1, 6);
    for (const double alpha : {1.0, 0.0}) {
      QueryOptions opts;
      opts.retrieval.alpha = alpha;
      opts.retrieval.boost_per_keyword = 0.0;
      const auto prepared = prepare_query(text, std::nullopt, {p.lexicon, p.embedder, *idx}, opts);
      const auto result = retrieve(prepared, *idx, opts.retrieval);
      const auto tokens = prepared.search_tokens();
      // Brute-force argmax over every chunk, ties to the smaller id.
      std::string best;
      double best_score = 0;
      for (const auto &c : idx->chunks()) {
        const double s = alpha == 1.0 ? idx->semantic_similarity(prepared.embedding, c.chunk_id)
                                      : idx->bm25_score(tokens, c.chunk_id);
        if (best.empty() || s > best_score || (s == best_score && c.chunk_id < best)) {
          best = c.chunk_id;
          best_score = s;
        }
      }
      if (best_score <= 0) {
        continue; // no signal: every fused score is 0
      }
      (alpha == 1.0 ? compared_sem : compared_lex) += 1;
      if (result.contexts.empty() || result.contexts.front().chunk.chunk_id != best) {
        ++wrong;
      }
    }
  }
  const bool enough = compared_sem == 200 && compared_lex == 200;
  return {wrong == 0 && enough, std::to_string(compared_sem) + " semantic + " + std::to_string(compared_lex) +
                                    " lexical argmax comparisons, " + std::to_string(wrong) + " mismatches"};
}

Outcome check_chunker() {
  std::mt19937_64 rng(2718);
  const std::vector<std::string> seps{"\n\n", "\n", ". ", " ", "  "};
  const ChunkConfig cfg;
  std::size_t violations = 0, separator_free = 0, chunks_seen = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const bool plain = trial % 5 == 0;
    const std::size_t target = rng() % 9000;
    std::string body;
    while (body.size() < target) {
      const std::size_t w = 1 + rng() % 14;
      for (std::size_t i = 0; i < w; ++i) {
        body.push_back(static_cast<char>('a' + rng() % 26));
      }
      if (!plain) {
        body += seps[rng() % seps.size()];
      }
    }
    Document d;
    d.doc_id = "doc" + std::to_string(trial);
    d.body = body;
    const auto chunks = split_into_chunks(d, cfg);
    chunks_seen += chunks.size();

    std::string rebuilt;
    std::size_t covered_to = 0;
    for (const auto &c : chunks) {
      if (c.span.length() > cfg.max_chars || utf8::decode(c.text).code_points.size() > cfg.max_chars ||
          c.text != body.substr(c.span.start, c.span.length()) || c.span.end < covered_to) {
        ++violations;
        continue;
      }
      const std::size_t from = std::max(c.span.start, covered_to);
      rebuilt += body.substr(from, c.span.end - from);
      covered_to = c.span.end;
    }
    auto strip = [](const std::string &s) {
      std::string out;
      for (const char ch : s) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
          out.push_back(ch);
        }
      }
      return out;
    };
    if (strip(rebuilt) != strip(body)) {
      ++violations;
    }
    if (plain) {
      ++separator_free;
      const auto expected = oracle::fixed_windows(body.size(), cfg.max_chars, cfg.overlap_chars);
      bool same = expected.size() == chunks.size();
      for (std::size_t i = 0; same && i < chunks.size(); ++i) {
        same = chunks[i].span.start == expected[i].first && chunks[i].span.end == expected[i].second;
      }
      violations += same ? 0 : 1;
    }
  }
  return {violations == 0, "500 documents (" + std::to_string(separator_free) + " separator-free), " +
                               std::to_string(chunks_seen) + " chunks, " + std::to_string(violations) +
                               " violations"};
}

Outcome check_planted_recall() {
  Pipeline p;
  const auto truth = testutil::fixture_truth();
  const auto idx = p.index.snapshot();
  std::size_t hits = 0;
  std::string misses;
  for (const auto &rec : truth) {
    const auto term = testutil::tag_value(rec, "planted_term");
    const auto doc = testutil::tag_value(rec, "planted_doc");
    std::set<std::string> planted;
    for (const auto &c : idx->chunks()) {
      const auto toks = oracle::tokens(c.text);
      if (c.doc_id == doc && std::find(toks.begin(), toks.end(), term) != toks.end()) {
        planted.insert(c.chunk_id);
      }
    }
    const auto a = handle_chat({std::nullopt, rec.question, std::nullopt, std::nullopt}, p.deps());
    bool found = false;
    for (const auto &c : a.contexts) {
      found = found || planted.count(c.chunk.chunk_id) > 0;
    }
    if (found && a.contexts.size() == 6) {
      ++hits;
    } else {
      misses += " " + rec.id;
    }
  }
  const bool pass = truth.size() == 30 && hits >= 27;
  return {pass, std::to_string(hits) + "/" + std::to_string(truth.size()) + " planted chunks in top-6" +
                    (misses.empty() ? "" : "; missed:" + misses)};
}

Outcome check_rag_over_baseline() {
  Pipeline p;
  ExtractiveGenerator extractive;
  const auto truth = testutil::fixture_truth();
  BenchmarkOptions opts;
  opts.with_baseline = true;
  const auto res = run_benchmark(truth, p.deps(&extractive), opts);
  if (!res.aggregates.baseline_mean_similarity || res.aggregates.failed != 0) {
    return {false, "baseline missing or records failed"};
  }
  const double rag = res.aggregates.mean_semantic_similarity;
  const double base = *res.aggregates.baseline_mean_similarity;
  return {rag - base >= 0.10, fmt("rag=%.4f baseline=%.4f margin=%.4f", rag, base, rag - base)};
}

struct EvalDirs {
  testutil::TempDir tmp;
  fs::path first = tmp / "run1";
  fs::path second = tmp / "run2";
};

Outcome check_eval_determinism(const EvalDirs &dirs) {
  const auto index = (dirs.tmp / "index").string();
  const auto corpus = (testutil::fixture_dir() / "corpus.jsonl").string();
  const auto truth = (testutil::fixture_dir() / "ground_truth.jsonl").string();
  if (run_cli_quiet({"ingest", "--corpus", corpus, "--index", index}) != 0) {
    return {false, "ingest failed"};
  }
  for (const auto &out : {dirs.first, dirs.second}) {
    if (run_cli_quiet({"eval", "--index", index, "--ground-truth", truth, "--out", out.string(), "--baseline",
                       "--clock", "frozen"}) != 0) {
      return {false, "eval failed"};
    }
  }
  std::set<std::string> names_a, names_b;
  for (const auto &e : fs::directory_iterator(dirs.first)) {
    names_a.insert(e.path().filename().string());
  }
  for (const auto &e : fs::directory_iterator(dirs.second)) {
    names_b.insert(e.path().filename().string());
  }
  if (names_a != names_b || names_a.size() < 3) {
    return {false, "report file sets differ"};
  }
  std::size_t bytes = 0;
  for (const auto &name : names_a) {
    const auto a = testutil::read_file(dirs.first / name);
    if (a != testutil::read_file(dirs.second / name)) {
      return {false, name + " differs between runs"};
    }
    bytes += a.size();
  }
  return {true, std::to_string(names_a.size()) + " files, " + std::to_string(bytes) + " bytes identical"};
}

Outcome check_latency() {
  const auto fixture = testutil::fixture_corpus();
  std::vector<std::string> vocab;
  {
    std::set<std::string> v;
    for (const auto &d : fixture) {
      for (auto &t : oracle::tokens(d.body)) {
        v.insert(std::move(t));
      }
    }
    vocab.assign(v.begin(), v.end());
  }
  // Synthetic filler words keep the vocabulary realistic in size.
  std::mt19937_64 rng(10000);
  for (int i = 0; i < 3000; ++i) {
    std::string w;
    const int len = 3 + static_cast<int>(rng() % 8);
    for (int j = 0; j < len; ++j) {
      w.push_back(static_cast<char>('a' + rng() % 26));
    }
    vocab.push_back(w);
  }
  std::vector<Chunk> chunks;
  std::vector<std::string> texts;
  chunks.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    std::string text;
    while (text.size() < 700) {
      // Skewed draw so that common words have long posting lists.
      const double r = std::pow(static_cast<double>(rng() % 1000000) / 1e6, 3.0);
      text += vocab[static_cast<std::size_t>(r * static_cast<double>(vocab.size()))] + ' ';
    }
    char id[32];
    std::snprintf(id, sizeof id, "c%05d", i);
    chunks.push_back(testutil::make_chunk(id, text));
    texts.push_back(std::move(text));
  }
  const HashEmbedder e;
  KnowledgeIndex idx(e.dims(), e.fingerprint());
  idx.upsert_chunks(chunks, e.embed_batch(texts));

  const RetrievalConfig cfg;
  std::vector<double> ms;
  for (int q = 0; q < 100; ++q) {
    const auto text = random_words(rng, vocab, 4, 10);
    const auto vec = e.embed(text);
    const auto toks = tokenize(text);
    const std::vector<std::string> keywords{toks.front()};
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = retrieve(vec, toks, keywords, idx, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    if (r.contexts.size() != cfg.k) {
      return {false, "retrieve returned " + std::to_string(r.contexts.size()) + " contexts"};
    }
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const double median = (ms[49] + ms[50]) / 2;
  return {median < 100.0, fmt("10000 chunks x 1536 dims, median %.2f ms, p90 %.2f ms", median, ms[89])};
}

Outcome check_persistence() {
  const HashEmbedder e;
  std::mt19937_64 rng(11);
  Pipeline p;
  const auto vocab = corpus_vocabulary(*p.index.snapshot());
  std::vector<Chunk> chunks;
  for (int i = 0; i < 100; ++i) {
    chunks.push_back(testutil::make_chunk("p" + std::to_string(i), random_words(rng, vocab, 20, 60)));
  }
  const auto idx = testutil::build_index(chunks, e);
  testutil::TempDir dir;
  idx.save(dir.path());
  const auto loaded = KnowledgeIndex::load(dir.path(), e.dims());
  RetrievalConfig cfg;
  cfg.k = 10;
  std::size_t diffs = 0;
  for (int q = 0; q < 20; ++q) {
    const auto text = random_words(rng, vocab, 2, 8);
    const auto vec = e.embed(text);
    const auto toks = tokenize(text);
    const std::vector<std::string> kw{toks.front()};
    diffs += idx.vector_search(vec, 10) == loaded.vector_search(vec, 10) ? 0 : 1;
    diffs += idx.lexical_search(toks, 10) == loaded.lexical_search(toks, 10) ? 0 : 1;
    diffs += retrieve(vec, toks, kw, idx, cfg) == retrieve(vec, toks, kw, loaded, cfg) ? 0 : 1;
  }
  return {diffs == 0 && loaded.size() == 100,
          "20 queries x (semantic, lexical, hybrid) top-10, " + std::to_string(diffs) + " differences"};
}

Outcome check_ood() {
  Pipeline p;
  const std::string off_topic = "Explain quantum chromodynamics gauge symmetry";
  const auto a = handle_chat({std::nullopt, off_topic, std::nullopt, std::nullopt}, p.deps());
  const int calls_after_ood = p.generator.calls.load();
  if (!a.ood || a.text != kDefaultClarification || calls_after_ood != 0 || !a.contexts.empty()) {
    return {false, "off-topic query: ood=" + std::to_string(a.ood) + " calls=" + std::to_string(calls_after_ood)};
  }
  const auto b = handle_chat({std::nullopt, off_topic + " broiler", std::nullopt, std::nullopt}, p.deps());
  if (b.ood || p.generator.calls.load() != 1) {
    return {false, "species keyword did not clear the flag"};
  }
  return {true, fmt("preview max fused %.3f flagged with 0 generation calls; with a species keyword ood=false",
                    a.prepared.preview_max_fused)};
}

Outcome check_metrics(const EvalDirs &dirs) {
  const auto evs = load_per_query(dirs.first / "per_query.jsonl");
  const auto agg = load_aggregates(dirs.first / "aggregates.json");
  std::vector<double> sim, prec, lat, ctx, base;
  std::size_t failed = 0;
  for (const auto &ev : evs) {
    if (ev.failed) {
      ++failed;
      continue;
    }
    sim.push_back(ev.semantic_similarity);
    prec.push_back(ev.retrieval_precision);
    lat.push_back(static_cast<double>(ev.latency_ms) / 1000.0);
    ctx.push_back(static_cast<double>(ev.contexts_count));
    if (ev.baseline_similarity) {
      base.push_back(*ev.baseline_similarity);
    }
  }
  double worst = std::max({std::abs(oracle::mean(sim) - agg.mean_semantic_similarity),
                           std::abs(oracle::mean(prec) - agg.mean_retrieval_precision),
                           std::abs(oracle::mean(lat) - agg.mean_latency_s),
                           std::abs(oracle::mean(ctx) - agg.mean_contexts)});
  if (agg.baseline_mean_similarity) {
    worst = std::max(worst, std::abs(oracle::mean(base) - *agg.baseline_mean_similarity));
  }
  std::size_t binned = 0;
  for (const auto &b : agg.histogram) {
    binned += b.count;
  }
  const bool pass = worst <= 1e-9 && binned == agg.n && agg.n == sim.size() && agg.failed == failed && agg.n > 0;
  return {pass, "n=" + std::to_string(agg.n) + " histogram total=" + std::to_string(binned) +
                    fmt(" max mean error %.3g", worst)};
}

} // namespace

int main() {
  EvalDirs eval_dirs;
  struct Check {
    int id;
    const char *name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks{
      {1, "configuration defaults", 1, check_config_defaults},
      {2, "prompt byte-exactness", 1, check_prompt_golden},
      {3, "BM25 reference equivalence", 1, check_bm25_oracle},
      {4, "MMR greedy reference equivalence", 10, check_mmr_oracle},
      {5, "fusion boundary argmax", 10, check_fusion_boundaries},
      {6, "chunker invariants", 10, check_chunker},
      {7, "planted retrieval recall", 5, check_planted_recall},
      {8, "RAG over no-context baseline", 10, check_rag_over_baseline},
      {9, "eval report determinism", 15, [&] { return check_eval_determinism(eval_dirs); }},
      {10, "retrieval latency at 10k chunks", 60, check_latency},
      {11, "index persistence round trip", 5, check_persistence},
      {12, "out-of-domain handling", 1, check_ood},
      {13, "metrics arithmetic", 1, [&] { return check_metrics(eval_dirs); }},
  };
  int failures = 0;
  for (const auto &c : checks) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s budget)", c.budget_s);
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << fmt(" (%.2f s): ", secs)
              << o.detail << std::endl;
  }
  std::cout << (checks.size() - static_cast<std::size_t>(failures)) << "/" << checks.size() << " passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
