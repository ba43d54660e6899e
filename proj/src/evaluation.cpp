#include "coop_rag/evaluation.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace coop_rag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string &what) {
  throw Error(Errc::parse_error, "ground truth line " + std::to_string(line) + ": " + what, line);
}

std::string required_text(const json &obj, const char *key, std::size_t line) {
  if (!obj.contains(key)) {
    fail_line(line, std::string("missing ") + key);
  }
  const auto &v = obj.at(key);
  if (!v.is_string()) {
    fail_line(line, std::string(key) + " must be a string");
  }
  auto s = v.get<std::string>();
  if (is_blank(s)) {
    fail_line(line, std::string(key) + " must not be empty");
  }
  return s;
}

double round12(double v) { return std::round(v * 1e12) / 1e12; }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, const std::string &data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  if (!out) {
    throw Error(Errc::io_error, "cannot write " + path.string());
  }
}

json optional_json(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

json to_json(const QueryEvaluation &e) {
  return {{"id", e.id},
          {"failed", e.failed},
          {"error", e.error},
          {"generated_answer", e.generated_answer},
          {"semantic_similarity", e.semantic_similarity},
          {"retrieval_precision", e.retrieval_precision},
          {"latency_ms", e.latency_ms},
          {"contexts_count", e.contexts_count},
          {"ood", e.ood},
          {"baseline_answer", e.baseline_answer ? json(*e.baseline_answer) : json(nullptr)},
          {"baseline_similarity", optional_json(e.baseline_similarity)},
          {"warnings", e.warnings}};
}

QueryEvaluation evaluation_from_json(const json &j) {
  QueryEvaluation e;
  e.id = j.at("id").get<std::string>();
  e.failed = j.at("failed").get<bool>();
  e.error = j.at("error").get<std::string>();
  e.generated_answer = j.at("generated_answer").get<std::string>();
  e.semantic_similarity = j.at("semantic_similarity").get<double>();
  e.retrieval_precision = j.at("retrieval_precision").get<double>();
  e.latency_ms = j.at("latency_ms").get<std::int64_t>();
  e.contexts_count = j.at("contexts_count").get<std::size_t>();
  e.ood = j.at("ood").get<bool>();
  if (!j.at("baseline_answer").is_null()) {
    e.baseline_answer = j.at("baseline_answer").get<std::string>();
  }
  if (!j.at("baseline_similarity").is_null()) {
    e.baseline_similarity = j.at("baseline_similarity").get<double>();
  }
  e.warnings = j.at("warnings").get<std::vector<std::string>>();
  return e;
}

QueryEvaluation evaluate_one(const GroundTruthRecord &record, const PipelineDeps &deps,
                             const BenchmarkOptions &options) {
  QueryEvaluation e;
  e.id = record.id;
  try {
    ChatRequest request;
    request.message = record.question;
    request.style = options.style;
    const auto answer = handle_chat(request, deps);
    e.generated_answer = answer.generated;
    e.latency_ms = answer.latency_ms;
    e.contexts_count = answer.contexts.size();
    e.ood = answer.ood;
    e.warnings = answer.warnings;
    e.semantic_similarity = semantic_similarity(answer.generated, record.expected_answer, *deps.embedder);
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(answer.contexts.size());
    const auto index = deps.index->snapshot();
    for (const auto &c : answer.contexts) {
      vectors.push_back(index->embedding(c.chunk.chunk_id));
    }
    e.retrieval_precision = retrieval_precision(answer.prepared.embedding, vectors, &e.warnings);
    if (options.with_baseline) {
      e.baseline_answer = generate_baseline(record.question, options.style, *deps.generator);
      e.baseline_similarity = semantic_similarity(*e.baseline_answer, record.expected_answer, *deps.embedder);
    }
  } catch (const Error &err) {
    QueryEvaluation failed;
    failed.id = record.id;
    failed.failed = true;
    failed.error = std::string(to_string(err.code())) + ": " + err.what();
    return failed;
  }
  return e;
}

} // namespace

std::vector<GroundTruthRecord> parse_ground_truth(std::string_view content) {
  std::vector<GroundTruthRecord> out;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) {
      end = content.size();
    }
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (is_blank(line)) {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      fail_line(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
      fail_line(line_no, "expected a JSON object");
    }
    GroundTruthRecord r;
    r.id = required_text(obj, "id", line_no);
    r.question = required_text(obj, "question", line_no);
    r.expected_answer = required_text(obj, "expected_answer", line_no);
    if (obj.contains("tags") && !obj.at("tags").is_null()) {
      try {
        r.tags = obj.at("tags").get<std::vector<std::string>>();
      } catch (const json::exception &) {
        fail_line(line_no, "tags must be a list of strings");
      }
    }
    if (!ids.insert(r.id).second) {
      throw Error(Errc::duplicate_id, "duplicate ground truth id: " + r.id, line_no);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<GroundTruthRecord> load_ground_truth(const fs::path &path) {
  return parse_ground_truth(read_file(path));
}

double semantic_similarity(std::string_view generated, std::string_view expected, const Embedder &embedder) {
  return cosine_similarity(embedder.embed(generated), embedder.embed(expected));
}

double retrieval_precision(const EmbeddingVector &query, std::span<const EmbeddingVector> retrieved,
                           std::vector<std::string> *warnings) {
  if (retrieved.empty()) {
    if (warnings != nullptr) {
      warnings->emplace_back("retrieval precision over zero contexts reported as 0.0");
    }
    return 0.0;
  }
  double sum = 0.0;
  for (const auto &v : retrieved) {
    sum += cosine_similarity(query, v);
  }
  return sum / static_cast<double>(retrieved.size());
}

std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width, double lo, double hi) {
  if (!(bin_width > 0.0) || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(Errc::invalid_argument, "histogram needs bin_width > 0 and hi > lo");
  }
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-9));
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].lower = round12(lo + static_cast<double>(i) * bin_width);
  }
  for (const double v : values) {
    std::size_t idx = 0;
    if (std::isfinite(v) && v > lo) {
      const double pos = std::floor((v - lo) / bin_width);
      idx = pos >= static_cast<double>(bins) ? bins - 1 : static_cast<std::size_t>(pos);
      // Floating-point division can land a value sitting on an edge in the
      // lower bin; compare against the rounded edges instead.
      while (idx + 1 < bins && v >= out[idx + 1].lower) {
        ++idx;
      }
      while (idx > 0 && v < out[idx].lower) {
        --idx;
      }
    } else if (v == std::numeric_limits<double>::infinity()) {
      idx = bins - 1;
    }
    ++out[idx].count;
  }
  return out;
}

AggregateMetrics aggregate(std::span<const QueryEvaluation> evaluations, double bin_width) {
  AggregateMetrics m;
  std::vector<double> sims;
  double sum_rp = 0.0, sum_latency = 0.0, sum_contexts = 0.0, sum_base = 0.0;
  std::size_t base_n = 0;
  double sum_sim = 0.0;
  for (const auto &e : evaluations) {
    if (e.failed) {
      ++m.failed;
      continue;
    }
    ++m.n;
    sims.push_back(e.semantic_similarity);
    sum_sim += e.semantic_similarity;
    sum_rp += e.retrieval_precision;
    sum_latency += static_cast<double>(e.latency_ms);
    sum_contexts += static_cast<double>(e.contexts_count);
    if (e.baseline_similarity) {
      sum_base += *e.baseline_similarity;
      ++base_n;
    }
  }
  if (m.n > 0) {
    const auto n = static_cast<double>(m.n);
    m.mean_semantic_similarity = sum_sim / n;
    m.mean_retrieval_precision = sum_rp / n;
    m.mean_latency_s = sum_latency / n / 1000.0;
    m.mean_contexts = sum_contexts / n;
  }
  if (base_n > 0) {
    m.baseline_mean_similarity = sum_base / static_cast<double>(base_n);
  }
  m.histogram = histogram(sims, bin_width, 0.0, 1.0);
  return m;
}

BenchmarkResult run_benchmark(std::span<const GroundTruthRecord> records, const PipelineDeps &deps,
                              const BenchmarkOptions &options) {
  SessionStore private_sessions(deps.clock);
  PipelineDeps local = deps;
  local.sessions = &private_sessions;

  BenchmarkResult result;
  result.evaluations.resize(records.size());
  const auto workers = std::max<std::size_t>(1, std::min(options.parallelism, records.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      result.evaluations[i] = evaluate_one(records[i], local, options);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
          result.evaluations[i] = evaluate_one(records[i], local, options);
        }
      });
    }
  }
  result.aggregates = aggregate(result.evaluations, options.histogram_bin_width);
  return result;
}

void write_report(const BenchmarkResult &result, const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  }
  std::string per_query;
  for (const auto &e : result.evaluations) {
    per_query += to_json(e).dump() + "\n";
  }
  const auto &a = result.aggregates;
  json bins = json::array();
  for (const auto &b : a.histogram) {
    bins.push_back({{"bin_lower", b.lower}, {"count", b.count}});
  }
  const json agg = {{"schema_version", kReportSchemaVersion},
                    {"n", a.n},
                    {"failed", a.failed},
                    {"mean_semantic_similarity", a.mean_semantic_similarity},
                    {"mean_retrieval_precision", a.mean_retrieval_precision},
                    {"mean_latency_s", a.mean_latency_s},
                    {"mean_contexts", a.mean_contexts},
                    {"histogram", bins},
                    {"baseline_mean_similarity", optional_json(a.baseline_mean_similarity)}};
  std::string csv = "bin_lower,count\n";
  for (const auto &b : a.histogram) {
    csv += format_double(b.lower) + "," + std::to_string(b.count) + "\n";
  }
  write_file(dir / "per_query.jsonl", per_query);
  write_file(dir / "aggregates.json", agg.dump(2) + "\n");
  write_file(dir / "histogram.csv", csv);
}

AggregateMetrics load_aggregates(const fs::path &path) {
  try {
    const auto j = json::parse(read_file(path));
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw Error(Errc::parse_error, "unsupported aggregates schema_version in " + path.string());
    }
    AggregateMetrics a;
    a.n = j.at("n").get<std::size_t>();
    a.failed = j.at("failed").get<std::size_t>();
    a.mean_semantic_similarity = j.at("mean_semantic_similarity").get<double>();
    a.mean_retrieval_precision = j.at("mean_retrieval_precision").get<double>();
    a.mean_latency_s = j.at("mean_latency_s").get<double>();
    a.mean_contexts = j.at("mean_contexts").get<double>();
    for (const auto &b : j.at("histogram")) {
      a.histogram.push_back({b.at("bin_lower").get<double>(), b.at("count").get<std::size_t>()});
    }
    if (!j.at("baseline_mean_similarity").is_null()) {
      a.baseline_mean_similarity = j.at("baseline_mean_similarity").get<double>();
    }
    return a;
  } catch (const json::exception &e) {
    throw Error(Errc::parse_error, "malformed aggregates file " + path.string() + ": " + e.what());
  }
}

std::vector<QueryEvaluation> load_per_query(const fs::path &path) {
  std::vector<QueryEvaluation> out;
  std::istringstream in(read_file(path));
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (!line.empty()) {
        out.push_back(evaluation_from_json(json::parse(line)));
      }
    }
  } catch (const json::exception &e) {
    throw Error(Errc::parse_error, "malformed per-query file " + path.string() + ": " + e.what());
  }
  return out;
}

} // namespace coop_rag
