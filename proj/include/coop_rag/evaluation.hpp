#pragma once

#include "coop_rag/embedding.hpp"
#include "coop_rag/orchestrator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

struct GroundTruthRecord {
  std::string id;
  std::string question;
  std::string expected_answer;
  std::vector<std::string> tags;

  bool operator==(const GroundTruthRecord &) const = default;
};

std::vector<GroundTruthRecord> parse_ground_truth(std::string_view content);
std::vector<GroundTruthRecord> load_ground_truth(const std::filesystem::path &path);

double semantic_similarity(std::string_view generated, std::string_view expected, const Embedder &embedder);

// Mean cosine of the query against each retrieved vector; 0.0 plus a warning
// when nothing was retrieved.
double retrieval_precision(const EmbeddingVector &query, std::span<const EmbeddingVector> retrieved,
                           std::vector<std::string> *warnings = nullptr);

struct HistogramBin {
  double lower = 0.0;
  std::size_t count = 0;

  bool operator==(const HistogramBin &) const = default;
};

// Half-open bins of `bin_width` over [lo, hi); out-of-range values go to the
// end bins.
std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width, double lo, double hi);

struct QueryEvaluation {
  std::string id;
  bool failed = false;
  std::string error;
  std::string generated_answer;
  double semantic_similarity = 0.0;
  double retrieval_precision = 0.0;
  std::int64_t latency_ms = 0;
  std::size_t contexts_count = 0;
  bool ood = false;
  std::optional<std::string> baseline_answer;
  std::optional<double> baseline_similarity;
  std::vector<std::string> warnings;

  bool operator==(const QueryEvaluation &) const = default;
};

struct AggregateMetrics {
  // Successful evaluations; failures are counted separately.
  std::size_t n = 0;
  std::size_t failed = 0;
  double mean_semantic_similarity = 0.0;
  double mean_retrieval_precision = 0.0;
  double mean_latency_s = 0.0;
  double mean_contexts = 0.0;
  std::vector<HistogramBin> histogram;
  std::optional<double> baseline_mean_similarity;

  bool operator==(const AggregateMetrics &) const = default;
};

struct BenchmarkOptions {
  bool with_baseline = false;
  std::size_t parallelism = 1;
  double histogram_bin_width = 0.05;
  ResponseStyle style = ResponseStyle::concise;
};

struct BenchmarkResult {
  std::vector<QueryEvaluation> evaluations;
  AggregateMetrics aggregates;
};

AggregateMetrics aggregate(std::span<const QueryEvaluation> evaluations, double bin_width = 0.05);

// Each record runs in a fresh session. `deps.sessions` is ignored: the run
// uses a private in-memory store.
BenchmarkResult run_benchmark(std::span<const GroundTruthRecord> records, const PipelineDeps &deps,
                              const BenchmarkOptions &options = {});

inline constexpr int kReportSchemaVersion = 1;

// Writes per_query.jsonl, aggregates.json and histogram.csv into `dir`.
void write_report(const BenchmarkResult &result, const std::filesystem::path &dir);

AggregateMetrics load_aggregates(const std::filesystem::path &path);
std::vector<QueryEvaluation> load_per_query(const std::filesystem::path &path);

} // namespace coop_rag
