#include "cli.hpp"

#include "coop_rag/config.hpp"
#include "coop_rag/corpus.hpp"
#include "coop_rag/index.hpp"
#include "coop_rag/orchestrator.hpp"
#include "coop_rag/service.hpp"
#include "coop_rag/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace coop_rag::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const Error &error) noexcept {
  switch (error.category()) {
    case ErrorCategory::io: return kExitIo;
    case ErrorCategory::backend: return kExitBackend;
    case ErrorCategory::input:
    case ErrorCategory::index: return kExitValidation;
  }
  return kExitIo;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) {
    throw Error(Errc::io_error, "cannot write " + path.string());
  }
}

/// Routes spdlog to `err` for the lifetime of one invocation.
class LogScope {
public:
  LogScope(std::ostream &err, bool verbose) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto logger = std::make_shared<spdlog::logger>("coop-rag", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(verbose ? spdlog::level::debug : spdlog::level::warn);
    spdlog::set_default_logger(logger);
  }
  ~LogScope() { spdlog::set_default_logger(previous_); }
  LogScope(const LogScope &) = delete;
  LogScope &operator=(const LogScope &) = delete;

private:
  std::shared_ptr<spdlog::logger> previous_;
};

struct CommonOpts {
  std::string config_path;
  bool json_out = false;
  bool verbose = false;
};

struct RetrievalOverrides {
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<std::size_t> pool_size;

  void apply(RetrievalConfig &r) const {
    if (k) r.k = *k;
    if (alpha) r.alpha = *alpha;
    if (lambda) r.lambda = *lambda;
    if (pool_size) r.pool_size = *pool_size;
    r.validate();
  }
};

void add_common(CLI::App &cmd, CommonOpts &common, bool with_json = true) {
  cmd.add_option("--config", common.config_path, "Service config file (JSON); falls back to $COOP_RAG_CONFIG");
  if (with_json) {
    cmd.add_flag("--json", common.json_out, "Emit a single JSON document on stdout");
  }
  cmd.add_flag("-v,--verbose", common.verbose, "Debug logging on stderr");
}

void add_retrieval(CLI::App &cmd, RetrievalOverrides &r) {
  cmd.add_option("--k", r.k, "Contexts to select");
  cmd.add_option("--alpha", r.alpha, "Semantic weight in score fusion");
  cmd.add_option("--lambda", r.lambda, "MMR redundancy weight");
  cmd.add_option("--pool-size", r.pool_size, "Candidates taken from each retriever");
}

ServiceConfig load_cfg(const CommonOpts &common) {
  std::optional<fs::path> p;
  if (!common.config_path.empty()) {
    p = common.config_path;
  }
  return resolve_config(p);
}

/// Backends plus index for the one-shot subcommands.
struct Runtime {
  ServiceConfig cfg;
  std::shared_ptr<const Clock> clock;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<Generator> generator;
  std::unique_ptr<VisionBackend> vision;
  DomainLexicon lexicon;
  std::unique_ptr<SharedIndex> index;
  SessionStore sessions;

  Runtime(ServiceConfig c, std::shared_ptr<const Clock> clk)
      : cfg(std::move(c)), clock(std::move(clk)), sessions(clock) {
    embedder = make_embedder(cfg.embedder);
    generator = make_generator(cfg.generation);
    vision = make_vision_backend(cfg.vision);
    lexicon = cfg.lexicon_path ? DomainLexicon::load(*cfg.lexicon_path) : DomainLexicon::builtin();
    const auto dir = cfg.resolved_index_dir();
    auto loaded = KnowledgeIndex::load(dir, embedder->dims());
    if (loaded.manifest().embedder_fingerprint != embedder->fingerprint()) {
      spdlog::warn("index was built with embedder '{}', current embedder is '{}'",
                   loaded.manifest().embedder_fingerprint, embedder->fingerprint());
    }
    index = std::make_unique<SharedIndex>(std::make_shared<const KnowledgeIndex>(std::move(loaded)));
  }

  PipelineDeps deps() {
    PipelineDeps d;
    d.index = index.get();
    d.embedder = embedder.get();
    d.generator = generator.get();
    d.vision = vision.get();
    d.lexicon = &lexicon;
    d.sessions = &sessions;
    d.clock = clock;
    d.config = cfg.pipeline();
    return d;
  }
};

std::optional<ResponseStyle> style_option(const std::string &name) {
  if (name.empty()) {
    return std::nullopt;
  }
  auto s = parse_style(name);
  if (!s) {
    throw Error(Errc::invalid_argument, "style must be concise or detailed, got '" + name + "'");
  }
  return s;
}

// ---- ingest ----

struct IngestOpts {
  CommonOpts common;
  std::string corpus;
  std::string index;
  bool append = false;
};

int cmd_ingest(const IngestOpts &o, std::ostream &out) {
  auto cfg = load_cfg(o.common);
  cfg.index_dir = o.index;
  const auto docs = load_corpus(o.corpus);
  const auto chunks = chunk_documents(docs, cfg.chunking);
  const auto embedder = make_embedder(cfg.embedder);
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto &c : chunks) {
    texts.push_back(c.text);
  }
  const auto vectors = embedder->embed_batch(texts);

  const fs::path dir = o.index;
  std::optional<KnowledgeIndex> idx;
  if (o.append && fs::exists(dir / "manifest.json")) {
    idx.emplace(KnowledgeIndex::load(dir, embedder->dims()));
  } else {
    idx.emplace(embedder->dims(), embedder->fingerprint(), cfg.bm25);
  }
  idx->upsert_chunks(chunks, vectors);
  idx->save(dir);

  if (o.common.json_out) {
    out << json{{"documents", docs.size()}, {"chunks", chunks.size()}, {"index_chunks", idx->size()},
                {"index", dir.string()}}
               .dump()
        << "\n";
  } else {
    out << "documents=" << docs.size() << " chunks=" << chunks.size() << " index_chunks=" << idx->size() << "\n";
  }
  return kExitOk;
}

// ---- query ----

struct QueryOpts {
  CommonOpts common;
  RetrievalOverrides retrieval;
  std::string index;
  std::string question;
  std::string image;
  std::string style;
};

int cmd_query(const QueryOpts &o, std::ostream &out, std::ostream &err) {
  auto cfg = load_cfg(o.common);
  cfg.index_dir = o.index;
  o.retrieval.apply(cfg.retrieval);
  ChatRequest req;
  req.message = o.question;
  req.style = style_option(o.style);
  if (!o.image.empty()) {
    req.image = read_text(o.image);
  }
  if (is_blank(req.message) && !req.image) {
    throw Error(Errc::input_required, "--question must not be empty");
  }
  Runtime rt(std::move(cfg), system_clock());
  const auto answer = handle_chat(req, rt.deps());
  if (o.common.json_out) {
    out << answer_to_json(answer) << "\n";
    return kExitOk;
  }
  for (const auto &w : answer.warnings) {
    err << "warning: " << w << "\n";
  }
  out << answer.text << "\n";
  return kExitOk;
}

// ---- chat ----

struct ChatOpts {
  CommonOpts common;
  RetrievalOverrides retrieval;
  std::string index;
  std::string style;
};

int cmd_chat(const ChatOpts &o, std::istream &in, std::ostream &out, std::ostream &err) {
  auto cfg = load_cfg(o.common);
  cfg.index_dir = o.index;
  o.retrieval.apply(cfg.retrieval);
  auto style = style_option(o.style).value_or(ResponseStyle::concise);
  Runtime rt(std::move(cfg), system_clock());
  const auto deps = rt.deps();

  std::optional<std::string> session;
  int status = kExitOk;
  out << "Type a question, or /style concise|detailed, /new, /quit.\n";
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) {
      continue;
    }
    if (text == "/quit" || text == "/exit") {
      break;
    }
    if (text == "/new") {
      session.reset();
      out << "(new session)\n";
      continue;
    }
    if (text.rfind("/style", 0) == 0) {
      const auto arg = trim(std::string_view(text).substr(6));
      const auto parsed = parse_style(arg);
      if (!parsed) {
        err << "error: /style takes concise or detailed\n";
        status = status == kExitOk ? kExitValidation : status;
        continue;
      }
      style = *parsed;
      out << "(style: " << to_string(style) << ")\n";
      continue;
    }
    if (text.front() == '/') {
      err << "error: unknown command " << text << "\n";
      status = status == kExitOk ? kExitValidation : status;
      continue;
    }
    try {
      ChatRequest req;
      req.session_id = session;
      req.message = text;
      req.style = style;
      const auto answer = handle_chat(req, deps);
      session = answer.session_id;
      for (const auto &w : answer.warnings) {
        err << "warning: " << w << "\n";
      }
      out << answer.text << "\n";
    } catch (const Error &e) {
      err << "error: " << e.what() << "\n";
      status = status == kExitOk ? exit_code_for(e) : status;
    }
  }
  out << "\n";
  return status;
}

// ---- serve ----

struct ServeOpts {
  CommonOpts common;
  std::optional<int> port;
  std::string bind;
  std::string data_dir;
  std::string index;
  bool enable_ingest = false;
};

int cmd_serve(const ServeOpts &o, std::ostream &out) {
  auto cfg = load_cfg(o.common);
  if (o.port) cfg.port = *o.port;
  if (!o.bind.empty()) cfg.bind_address = o.bind;
  if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
  if (!o.index.empty()) cfg.index_dir = o.index;
  if (o.enable_ingest) cfg.ingestion_enabled = true;

  // Block before any service thread exists so every thread inherits the mask
  // and the signal is only delivered through sigwait below.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &set, &previous);
  struct Restore {
    sigset_t mask;
    ~Restore() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  Service service(cfg);
  const int port = service.start();
  if (o.common.json_out) {
    out << json{{"address", cfg.bind_address}, {"port", port}}.dump() << "\n";
  } else {
    out << "listening on " << cfg.bind_address << ":" << port << "\n";
  }
  out.flush();

  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {} received; shutting down", sig);
  service.stop();
  return kExitOk;
}

// ---- eval ----

struct EvalOpts {
  CommonOpts common;
  RetrievalOverrides retrieval;
  std::string index;
  std::string ground_truth;
  std::string out_dir;
  bool baseline = false;
  std::size_t parallelism = 1;
  std::string clock = "system";
  std::string style;
  double bin_width = 0.05;
};

int cmd_eval(const EvalOpts &o, std::ostream &out) {
  auto cfg = load_cfg(o.common);
  cfg.index_dir = o.index;
  o.retrieval.apply(cfg.retrieval);
  std::shared_ptr<const Clock> clock;
  if (o.clock == "frozen") {
    clock = std::make_shared<FrozenClock>();
  } else if (o.clock == "system") {
    clock = system_clock();
  } else {
    throw Error(Errc::invalid_argument, "--clock must be system or frozen");
  }
  const auto records = load_ground_truth(o.ground_truth);
  Runtime rt(std::move(cfg), clock);
  BenchmarkOptions opts;
  opts.with_baseline = o.baseline;
  opts.parallelism = std::max<std::size_t>(1, o.parallelism);
  opts.histogram_bin_width = o.bin_width;
  opts.style = style_option(o.style).value_or(ResponseStyle::concise);
  const auto result = run_benchmark(records, rt.deps(), opts);
  write_report(result, o.out_dir);

  // Echo what was written rather than recomputing anything here.
  const fs::path agg_path = fs::path(o.out_dir) / "aggregates.json";
  if (o.common.json_out) {
    out << read_text(agg_path);
  } else {
    out << render_report_table(load_aggregates(agg_path));
    out << "report written to " << o.out_dir << "\n";
  }
  return result.aggregates.failed == 0 ? kExitOk : kExitBackend;
}

// ---- report ----

struct ReportOpts {
  CommonOpts common;
  std::string in_dir;
  std::string svg;
};

int cmd_report(const ReportOpts &o, std::ostream &out) {
  const fs::path dir = o.in_dir;
  const auto aggregates = load_aggregates(dir / "aggregates.json");
  const auto bins = parse_histogram_csv(read_text(dir / "histogram.csv"));
  const fs::path svg_path = o.svg.empty() ? dir / "histogram.svg" : fs::path(o.svg);
  write_text(svg_path, render_histogram_svg(bins));
  std::size_t nonempty = 0;
  for (const auto &b : bins) {
    nonempty += b.count > 0 ? 1 : 0;
  }
  if (o.common.json_out) {
    out << json{{"svg", svg_path.string()}, {"bins", bins.size()}, {"nonempty_bins", nonempty}, {"n", aggregates.n}}
               .dump()
        << "\n";
  } else {
    auto table_aggs = aggregates;
    table_aggs.histogram = bins;
    out << render_report_table(table_aggs);
    out << "histogram written to " << svg_path.string() << "\n";
  }
  return kExitOk;
}

} // namespace

std::string render_report_table(const AggregateMetrics &a) {
  std::string s;
  auto row = [&](const std::string &name, const std::string &value) {
    std::string padded = name;
    padded.resize(std::max<std::size_t>(padded.size() + 1, 28), ' ');
    s += padded + value + "\n";
  };
  row("metric", "value");
  row("n", std::to_string(a.n));
  row("failed", std::to_string(a.failed));
  row("mean_semantic_similarity", fixed(a.mean_semantic_similarity));
  row("mean_retrieval_precision", fixed(a.mean_retrieval_precision));
  row("mean_latency_s", fixed(a.mean_latency_s, 3));
  row("mean_contexts", fixed(a.mean_contexts, 2));
  row("baseline_mean_similarity", a.baseline_mean_similarity ? fixed(*a.baseline_mean_similarity) : "-");
  s += "\n";
  std::size_t peak = 0;
  for (const auto &b : a.histogram) {
    peak = std::max(peak, b.count);
  }
  s += "semantic similarity histogram\n";
  for (const auto &b : a.histogram) {
    const std::size_t bar = peak == 0 ? 0 : (b.count * 40 + peak - 1) / peak;
    s += fixed(b.lower, 2);
    if (b.count > 0) {
      s += "  " + std::string(bar, '#') + " " + std::to_string(b.count);
    }
    s += "\n";
  }
  return s;
}

std::string render_histogram_svg(const std::vector<HistogramBin> &bins) {
  constexpr double width = 640, height = 320, left = 48, right = 16, top = 16, bottom = 40;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  std::size_t peak = 0;
  for (const auto &b : bins) {
    peak = std::max(peak, b.count);
  }
  const double bar_w = bins.empty() ? 0.0 : plot_w / static_cast<double>(bins.size());

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"320\" viewBox=\"0 0 640 320\">\n";
  s += "<title>Semantic similarity distribution</title>\n";
  s += "<line x1=\"" + fixed(left, 2) + "\" y1=\"" + fixed(top + plot_h, 2) + "\" x2=\"" + fixed(left + plot_w, 2) +
       "\" y2=\"" + fixed(top + plot_h, 2) + "\" stroke=\"#333\"/>\n";
  s += "<line x1=\"" + fixed(left, 2) + "\" y1=\"" + fixed(top, 2) + "\" x2=\"" + fixed(left, 2) + "\" y2=\"" +
       fixed(top + plot_h, 2) + "\" stroke=\"#333\"/>\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto &b = bins[i];
    if (b.count == 0) {
      continue;
    }
    const double h = plot_h * static_cast<double>(b.count) / static_cast<double>(peak);
    const double x = left + bar_w * static_cast<double>(i);
    s += "<rect class=\"bar\" x=\"" + fixed(x, 2) + "\" y=\"" + fixed(top + plot_h - h, 2) + "\" width=\"" +
         fixed(bar_w, 2) + "\" height=\"" + fixed(h, 2) + "\" fill=\"#4a7ab5\" stroke=\"#fff\"><title>" +
         fixed(b.lower, 2) + ": " + std::to_string(b.count) + "</title></rect>\n";
  }
  if (!bins.empty()) {
    s += "<text x=\"" + fixed(left, 2) + "\" y=\"" + fixed(height - 20, 2) + "\" font-size=\"11\">" +
         fixed(bins.front().lower, 2) + "</text>\n";
    s += "<text x=\"" + fixed(left + plot_w, 2) + "\" y=\"" + fixed(height - 20, 2) +
         "\" font-size=\"11\" text-anchor=\"end\">" + fixed(bins.back().lower + (bins.size() > 1 ? bins[1].lower - bins[0].lower : 1.0), 2) +
         "</text>\n";
  }
  s += "<text x=\"" + fixed(left + plot_w / 2, 2) + "\" y=\"" + fixed(height - 6, 2) +
       "\" font-size=\"12\" text-anchor=\"middle\">semantic similarity</text>\n";
  s += "<text x=\"12\" y=\"" + fixed(top + plot_h / 2, 2) + "\" font-size=\"12\" transform=\"rotate(-90 12 " +
       fixed(top + plot_h / 2, 2) + ")\" text-anchor=\"middle\">queries (max " + std::to_string(peak) + ")</text>\n";
  s += "</svg>\n";
  return s;
}

std::vector<HistogramBin> parse_histogram_csv(const std::string &content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "bin_lower,count") {
    throw Error(Errc::parse_error, "histogram.csv: expected header bin_lower,count");
  }
  std::vector<HistogramBin> bins;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) {
      continue;
    }
    const auto comma = t.find(',');
    HistogramBin b;
    bool ok = comma != std::string::npos;
    if (ok) {
      const auto *first = t.data();
      const auto r1 = std::from_chars(first, first + comma, b.lower);
      const auto r2 = std::from_chars(first + comma + 1, first + t.size(), b.count);
      ok = r1.ec == std::errc{} && r1.ptr == first + comma && r2.ec == std::errc{} && r2.ptr == first + t.size();
    }
    if (!ok) {
      throw Error(Errc::parse_error, "histogram.csv line " + std::to_string(lineno) + ": expected <float>,<count>", lineno);
    }
    bins.push_back(b);
  }
  return bins;
}

int run_cli(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err) {
  CLI::App app{"Poultry-domain retrieval-augmented question answering", "coop-rag"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 I/O error, 2 invalid input or index, 3 backend failure.");

  IngestOpts ingest;
  auto *c_ingest = app.add_subcommand("ingest", "Chunk, embed and index a corpus");
  c_ingest->add_option("--corpus", ingest.corpus, "JSONL file or directory of .txt/.md files")->required();
  c_ingest->add_option("--index", ingest.index, "Index directory to write")->required();
  c_ingest->add_flag("--append", ingest.append, "Merge into an existing index instead of replacing it");
  add_common(*c_ingest, ingest.common);

  QueryOpts query;
  auto *c_query = app.add_subcommand("query", "Answer one question");
  c_query->add_option("--index", query.index, "Index directory")->required();
  c_query->add_option("--question", query.question, "Question text")->required();
  c_query->add_option("--image", query.image, "Optional image file");
  c_query->add_option("--style", query.style, "concise or detailed");
  add_retrieval(*c_query, query.retrieval);
  add_common(*c_query, query.common);

  ChatOpts chat;
  auto *c_chat = app.add_subcommand("chat", "Interactive multi-turn chat on the terminal");
  c_chat->add_option("--index", chat.index, "Index directory")->required();
  c_chat->add_option("--style", chat.style, "concise or detailed");
  add_retrieval(*c_chat, chat.retrieval);
  add_common(*c_chat, chat.common, false);

  ServeOpts serve;
  auto *c_serve = app.add_subcommand("serve", "Run the HTTP API until SIGINT/SIGTERM");
  c_serve->add_option("--port", serve.port, "Port (0 picks a free one)");
  c_serve->add_option("--bind", serve.bind, "Bind address");
  c_serve->add_option("--data-dir", serve.data_dir, "Directory for logs and the default index");
  c_serve->add_option("--index", serve.index, "Index directory");
  c_serve->add_flag("--enable-ingest", serve.enable_ingest, "Allow POST /v1/ingest");
  add_common(*c_serve, serve.common);

  EvalOpts eval;
  auto *c_eval = app.add_subcommand("eval", "Benchmark against ground-truth Q/A pairs");
  c_eval->add_option("--index", eval.index, "Index directory")->required();
  c_eval->add_option("--ground-truth", eval.ground_truth, "Ground-truth JSONL")->required();
  c_eval->add_option("--out", eval.out_dir, "Report directory")->required();
  c_eval->add_flag("--baseline", eval.baseline, "Also score a no-context baseline");
  c_eval->add_option("--parallelism", eval.parallelism, "Concurrent queries")->check(CLI::PositiveNumber);
  c_eval->add_option("--clock", eval.clock, "system, or frozen for reproducible reports")
      ->check(CLI::IsMember({"system", "frozen"}));
  c_eval->add_option("--style", eval.style, "concise or detailed");
  c_eval->add_option("--bin-width", eval.bin_width, "Histogram bin width")->check(CLI::PositiveNumber);
  add_retrieval(*c_eval, eval.retrieval);
  add_common(*c_eval, eval.common);

  ReportOpts report;
  auto *c_report = app.add_subcommand("report", "Render a report directory as a table and SVG histogram");
  c_report->add_option("--in", report.in_dir, "Directory written by eval")->required();
  c_report->add_option("--svg", report.svg, "SVG output path (default <in>/histogram.svg)");
  add_common(*c_report, report.common);

  std::vector<std::string> argv_store{"coop-rag"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char *> argv;
  for (const auto &a : argv_store) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const CommonOpts *common = nullptr;
  for (const auto *c : {&ingest.common, &query.common, &chat.common, &serve.common, &eval.common, &report.common}) {
    if (c->verbose) {
      common = c;
    }
  }
  LogScope logs(err, common != nullptr);

  try {
    if (*c_ingest) return cmd_ingest(ingest, out);
    if (*c_query) return cmd_query(query, out, err);
    if (*c_chat) return cmd_chat(chat, in, out, err);
    if (*c_serve) return cmd_serve(serve, out);
    if (*c_eval) return cmd_eval(eval, out);
    if (*c_report) return cmd_report(report, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

} // namespace coop_rag::cli
