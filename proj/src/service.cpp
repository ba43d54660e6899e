#include "coop_rag/service.hpp"

#include "coop_rag/base64.hpp"
#include "coop_rag/corpus.hpp"
#include "coop_rag/error.hpp"
#include "coop_rag/orchestrator.hpp"
#include "coop_rag/text.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace coop_rag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFeedbackSteps[] = {0, 25, 50, 75, 100};

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

ApiResponse json_response(int status, const json &body) { return {status, body.dump(), {}}; }

ApiResponse error_response(const ApiError &e) {
  return json_response(e.status, {{"error", {{"code", e.code}, {"message", e.message}}}});
}

ApiError from_error(const Error &e) {
  switch (e.code()) {
    case Errc::input_required:
    case Errc::empty_text:
      return {400, "input_required", e.what()};
    case Errc::unknown_session:
      return {404, "unknown_session", e.what()};
    case Errc::index_empty:
      return {503, "index_not_loaded", e.what()};
    case Errc::dimension_mismatch:
      return {500, "internal_error", e.what()};
    default:
      break;
  }
  switch (e.category()) {
    case ErrorCategory::backend: return {502, "backend_failure", e.what()};
    case ErrorCategory::io: return {500, "internal_error", e.what()};
    case ErrorCategory::index: return {503, "index_not_loaded", e.what()};
    case ErrorCategory::input: return {400, "malformed_request", e.what()};
  }
  return {500, "internal_error", e.what()};
}

/// Append-only JSONL file.
class JsonlLog {
public:
  explicit JsonlLog(fs::path path) : path_(std::move(path)) {
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) {
      throw Error(Errc::io_error, "cannot open log " + path_.string());
    }
  }
  void append(const json &record) {
    std::lock_guard lock(mutex_);
    out_ << record.dump() << '\n';
    out_.flush();
  }
  void flush() {
    std::lock_guard lock(mutex_);
    out_.flush();
  }

private:
  fs::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

template <typename F>
void for_each_record(const fs::path &path, F &&fn) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    try {
      fn(json::parse(line));
    } catch (const std::exception &e) {
      spdlog::warn("skipping unreadable record in {}: {}", path.string(), e.what());
    }
  }
}

struct DayStats {
  std::size_t queries = 0;
  double accuracy_sum = 0.0;
  std::size_t accuracy_n = 0;
};

class Metrics {
public:
  void add_query(const std::string &date, bool ood, double latency_ms, std::size_t contexts) {
    std::lock_guard lock(mutex_);
    ++queries_;
    ood_ += ood ? 1 : 0;
    latency_sum_ += latency_ms;
    contexts_sum_ += static_cast<double>(contexts);
    ++days_[date].queries;
  }
  void add_feedback(const std::string &date, int pct) {
    std::lock_guard lock(mutex_);
    ++feedback_[pct];
    auto &d = days_[date];
    d.accuracy_sum += pct;
    ++d.accuracy_n;
  }
  json snapshot() const {
    std::lock_guard lock(mutex_);
    json hist = json::object();
    for (const int step : kFeedbackSteps) {
      const auto it = feedback_.find(step);
      hist[std::to_string(step)] = it == feedback_.end() ? 0 : it->second;
    }
    json days = json::array();
    for (const auto &[date, d] : days_) {
      days.push_back({{"date", date},
                      {"queries", d.queries},
                      {"mean_accuracy_pct", d.accuracy_n == 0 ? json(nullptr)
                                                              : json(d.accuracy_sum / static_cast<double>(d.accuracy_n))}});
    }
    const auto n = static_cast<double>(queries_);
    return {{"queries_total", queries_},
            {"ood_total", ood_},
            {"mean_latency_ms", queries_ == 0 ? 0.0 : latency_sum_ / n},
            {"mean_contexts", queries_ == 0 ? 0.0 : contexts_sum_ / n},
            {"feedback_histogram", hist},
            {"daily_counts", days}};
  }

private:
  mutable std::mutex mutex_;
  std::size_t queries_ = 0;
  std::size_t ood_ = 0;
  double latency_sum_ = 0.0;
  double contexts_sum_ = 0.0;
  std::map<int, std::size_t> feedback_;
  std::map<std::string, DayStats> days_;
};

std::shared_ptr<const KnowledgeIndex> open_index(const ServiceConfig &cfg, const Embedder &embedder) {
  const auto dir = cfg.resolved_index_dir();
  if (fs::exists(dir / "manifest.json")) {
    auto loaded = KnowledgeIndex::load(dir, embedder.dims());
    if (loaded.manifest().embedder_fingerprint != embedder.fingerprint()) {
      spdlog::warn("index at {} was built with embedder '{}', current embedder is '{}'", dir.string(),
                   loaded.manifest().embedder_fingerprint, embedder.fingerprint());
    }
    spdlog::info("loaded index from {} ({} chunks)", dir.string(), loaded.size());
    return std::make_shared<const KnowledgeIndex>(std::move(loaded));
  }
  spdlog::info("no index at {}; starting empty", dir.string());
  return std::make_shared<const KnowledgeIndex>(embedder.dims(), embedder.fingerprint(), cfg.bm25);
}

} // namespace

std::string answer_to_json(const Answer &answer) {
  json citations = json::array();
  for (const auto &c : answer.citations) {
    citations.push_back({{"source", c.source}, {"title", c.title}});
  }
  json contexts = json::array();
  for (const auto &c : answer.contexts) {
    const auto &cand = c.candidate;
    contexts.push_back({{"chunk_id", c.chunk.chunk_id},
                        {"doc_id", c.chunk.doc_id},
                        {"source", c.chunk.metadata.source.empty() ? c.chunk.doc_id : c.chunk.metadata.source},
                        {"title", c.chunk.metadata.title},
                        {"text", c.chunk.text},
                        {"score", cand.fused},
                        {"semantic_sim", cand.semantic_sim},
                        {"lexical_norm", cand.lexical_norm},
                        {"boosted", cand.boosted},
                        {"mmr_final", cand.mmr_final ? json(*cand.mmr_final) : json(nullptr)},
                        {"rank", cand.selected_rank ? json(*cand.selected_rank) : json(nullptr)}});
  }
  json corrections = json::array();
  for (const auto &[from, to] : answer.prepared.corrections) {
    corrections.push_back({{"original", from}, {"corrected", to}});
  }
  json expansions = json::array();
  for (const auto &[abbrev, phrase] : answer.prepared.expansions) {
    expansions.push_back({{"abbreviation", abbrev}, {"expansion", phrase}});
  }
  json keywords = json::array();
  for (const auto &k : answer.prepared.keywords) {
    keywords.push_back({{"token", k.token}, {"facet", to_string(k.facet)}});
  }
  return json{{"session_id", answer.session_id},
              {"turn_index", answer.turn_index},
              {"answer", answer.text},
              {"generated", answer.generated},
              {"citations", citations},
              {"contexts", contexts},
              {"ood", answer.ood},
              {"latency_ms", answer.latency_ms},
              {"style", to_string(answer.style)},
              {"category", to_string(answer.prepared.category)},
              {"keywords", keywords},
              {"corrections", corrections},
              {"expansions", expansions},
              {"image_caption", answer.prepared.image_caption ? json(*answer.prepared.image_caption) : json(nullptr)},
              {"warnings", answer.warnings}}
      .dump();
}

struct Service::Impl {
  ServiceConfig cfg;
  std::shared_ptr<const Clock> clock;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<Generator> generator;
  std::unique_ptr<VisionBackend> vision;
  DomainLexicon lexicon;
  std::unique_ptr<SharedIndex> index;
  std::unique_ptr<SessionStore> sessions;
  std::unique_ptr<JsonlLog> query_log;
  std::unique_ptr<JsonlLog> feedback_log;
  Metrics metrics;
  std::optional<std::string> auth_token;

  httplib::Server server;
  std::thread server_thread;
  std::thread probe_thread;
  std::mutex probe_mutex;
  std::condition_variable probe_cv;
  bool stopping = false;

  Impl(ServiceConfig config, ServiceBackends backends, std::shared_ptr<const Clock> clk)
      : cfg(std::move(config)), clock(std::move(clk)) {
    cfg.validate();
    embedder = backends.embedder ? std::move(backends.embedder) : make_embedder(cfg.embedder);
    generator = backends.generator ? std::move(backends.generator) : make_generator(cfg.generation);
    vision = backends.vision ? std::move(backends.vision) : make_vision_backend(cfg.vision);
    lexicon = cfg.lexicon_path ? DomainLexicon::load(*cfg.lexicon_path) : DomainLexicon::builtin();
    if (!cfg.auth_token_env.empty()) {
      const char *token = std::getenv(cfg.auth_token_env.c_str());
      if (token == nullptr || *token == '\0') {
        throw Error(Errc::config_error, "auth_token_env names " + cfg.auth_token_env + ", which is not set");
      }
      auth_token = token;
    }

    std::error_code ec;
    fs::create_directories(cfg.data_dir, ec);
    if (ec) {
      throw Error(Errc::io_error, "cannot create data_dir " + cfg.data_dir.string() + ": " + ec.message());
    }
    index = std::make_unique<SharedIndex>(open_index(cfg, *embedder));
    sessions = std::make_unique<SessionStore>(clock, cfg.data_dir / "sessions.jsonl");

    const auto queries_path = cfg.data_dir / "queries.jsonl";
    const auto feedback_path = cfg.data_dir / "feedback.jsonl";
    for_each_record(queries_path, [&](const json &r) {
      metrics.add_query(r.at("date").get<std::string>(), r.at("ood").get<bool>(),
                        r.at("latency_ms").get<double>(), r.at("contexts").get<std::size_t>());
    });
    for_each_record(feedback_path, [&](const json &r) {
      metrics.add_feedback(r.at("date").get<std::string>(), r.at("accuracy_pct").get<int>());
    });
    query_log = std::make_unique<JsonlLog>(queries_path);
    feedback_log = std::make_unique<JsonlLog>(feedback_path);
  }

  PipelineDeps deps() {
    PipelineDeps d;
    d.index = index.get();
    d.embedder = embedder.get();
    d.generator = generator.get();
    d.vision = vision.get();
    d.lexicon = &lexicon;
    d.sessions = sessions.get();
    d.clock = clock;
    d.config = cfg.pipeline();
    return d;
  }

  void add_cors(const ApiRequest &req, ApiResponse &res) const {
    const auto it = req.headers.find("origin");
    const bool wildcard = std::find(cfg.cors_origins.begin(), cfg.cors_origins.end(), "*") != cfg.cors_origins.end();
    if (wildcard) {
      res.headers.emplace_back("Access-Control-Allow-Origin", "*");
    } else if (it != req.headers.end() &&
               std::find(cfg.cors_origins.begin(), cfg.cors_origins.end(), it->second) != cfg.cors_origins.end()) {
      res.headers.emplace_back("Access-Control-Allow-Origin", it->second);
      res.headers.emplace_back("Vary", "Origin");
    } else {
      return;
    }
    res.headers.emplace_back("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.headers.emplace_back("Access-Control-Allow-Headers", "Content-Type, Authorization");
    res.headers.emplace_back("Access-Control-Max-Age", "600");
  }

  bool authorized(const ApiRequest &req) const {
    if (!auth_token) {
      return true;
    }
    const auto it = req.headers.find("authorization");
    return it != req.headers.end() && it->second == "Bearer " + *auth_token;
  }

  ApiResponse dispatch(const ApiRequest &req) {
    if (req.method == "OPTIONS") {
      return {204, "", {}};
    }
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    if (get && req.path == "/v1/health") {
      return health();
    }
    if (!authorized(req)) {
      return error_response({401, "unauthorized", "missing or invalid bearer token"});
    }
    if (req.body.size() > cfg.max_body_bytes) {
      return error_response({413, "payload_too_large",
                             "request body exceeds " + std::to_string(cfg.max_body_bytes) + " bytes"});
    }
    if (post && req.path == "/v1/chat") {
      return chat(req);
    }
    if (post && req.path == "/v1/feedback") {
      return feedback(req);
    }
    if (post && req.path == "/v1/ingest") {
      return ingest(req);
    }
    if (get && req.path == "/v1/metrics") {
      return json_response(200, metrics.snapshot());
    }
    return error_response({404, "not_found", "no route for " + req.method + " " + req.path});
  }

  ApiResponse health() const {
    const auto snap = index->snapshot();
    return json_response(200, {{"status", "ok"},
                               {"index_chunks", snap->size()},
                               {"backends",
                                {{"embedding", to_string(embedder->status())},
                                 {"generation", to_string(generator->status())},
                                 {"vision", to_string(vision->status())}}}});
  }

  static std::optional<json> parse_object(const std::string &body) {
    try {
      auto j = json::parse(body);
      if (j.is_object()) {
        return j;
      }
    } catch (const json::parse_error &) {
    }
    return std::nullopt;
  }

  ApiResponse chat(const ApiRequest &req) {
    const auto body = parse_object(req.body);
    if (!body) {
      return error_response({400, "malformed_request", "body must be a JSON object"});
    }
    ChatRequest chat_req;
    try {
      if (body->contains("session_id") && !body->at("session_id").is_null()) {
        chat_req.session_id = body->at("session_id").get<std::string>();
      }
      if (body->contains("message") && !body->at("message").is_null()) {
        chat_req.message = body->at("message").get<std::string>();
      }
      if (body->contains("style") && !body->at("style").is_null()) {
        const auto style = parse_style(body->at("style").get<std::string>());
        if (!style) {
          return error_response({400, "malformed_request", "style must be \"concise\" or \"detailed\""});
        }
        chat_req.style = style;
      }
      if (body->contains("image_base64") && !body->at("image_base64").is_null()) {
        const auto encoded = body->at("image_base64").get<std::string>();
        if (encoded.size() > cfg.max_image_base64_bytes) {
          return error_response({413, "payload_too_large",
                                 "image_base64 exceeds " + std::to_string(cfg.max_image_base64_bytes) + " bytes"});
        }
        auto decoded = base64::decode(encoded);
        if (!decoded) {
          return error_response({400, "malformed_request", "image_base64 is not valid base64"});
        }
        if (!decoded->empty()) {
          chat_req.image = std::move(*decoded);
        }
      }
    } catch (const json::exception &) {
      return error_response({400, "malformed_request", "session_id, message, style and image_base64 must be strings"});
    }
    if (is_blank(chat_req.message) && !chat_req.image) {
      return error_response({400, "input_required", "a message or an image is required"});
    }
    if (chat_req.session_id && !sessions->exists(*chat_req.session_id)) {
      return error_response({404, "unknown_session", "unknown session: " + *chat_req.session_id});
    }
    if (index->snapshot()->empty()) {
      return error_response({503, "index_not_loaded", "the knowledge index is empty; ingest a corpus first"});
    }

    Answer answer;
    try {
      answer = handle_chat(chat_req, deps());
    } catch (const Error &e) {
      spdlog::warn("chat failed: {}", e.what());
      return error_response(from_error(e));
    }

    const auto now = clock->wall_now();
    const auto date = format_utc_date(now);
    query_log->append({{"timestamp", format_utc(now)},
                       {"date", date},
                       {"session_id", answer.session_id},
                       {"turn_index", answer.turn_index},
                       {"ood", answer.ood},
                       {"latency_ms", answer.latency_ms},
                       {"contexts", answer.contexts.size()},
                       {"category", to_string(answer.prepared.category)}});
    metrics.add_query(date, answer.ood, static_cast<double>(answer.latency_ms), answer.contexts.size());

    return {200, answer_to_json(answer), {}};
  }

  ApiResponse feedback(const ApiRequest &req) {
    const auto body = parse_object(req.body);
    if (!body) {
      return error_response({400, "malformed_request", "body must be a JSON object"});
    }
    const auto &b = *body;
    if (!b.contains("session_id") || !b.at("session_id").is_string() || !b.contains("turn_index") ||
        !b.at("turn_index").is_number_integer()) {
      return error_response({400, "malformed_request", "session_id (string) and turn_index (integer) are required"});
    }
    if (!b.contains("accuracy_pct") || !b.at("accuracy_pct").is_number_integer()) {
      return error_response({400, "invalid_feedback", "accuracy_pct must be one of 0, 25, 50, 75, 100"});
    }
    const auto pct = b.at("accuracy_pct").get<long long>();
    if (std::find(std::begin(kFeedbackSteps), std::end(kFeedbackSteps), pct) == std::end(kFeedbackSteps)) {
      return error_response({400, "invalid_feedback", "accuracy_pct must be one of 0, 25, 50, 75, 100"});
    }
    std::optional<std::string> comment;
    if (b.contains("comment") && !b.at("comment").is_null()) {
      if (!b.at("comment").is_string()) {
        return error_response({400, "malformed_request", "comment must be a string"});
      }
      comment = b.at("comment").get<std::string>();
    }
    const auto session_id = b.at("session_id").get<std::string>();
    const auto turn_index = b.at("turn_index").get<long long>();
    if (!sessions->exists(session_id)) {
      return error_response({404, "unknown_session", "unknown session: " + session_id});
    }
    const auto turns = sessions->with_session(session_id, [](Session &s) { return s.turns.size(); });
    if (turn_index < 0 || static_cast<std::size_t>(turn_index) >= turns) {
      return error_response({404, "unknown_turn", "session " + session_id + " has no turn " + std::to_string(turn_index)});
    }
    const auto now = clock->wall_now();
    const auto date = format_utc_date(now);
    feedback_log->append({{"timestamp", format_utc(now)},
                          {"date", date},
                          {"session_id", session_id},
                          {"turn_index", turn_index},
                          {"accuracy_pct", pct},
                          {"comment", comment ? json(*comment) : json(nullptr)}});
    metrics.add_feedback(date, static_cast<int>(pct));
    return json_response(200, {{"accepted", true}});
  }

  ApiResponse ingest(const ApiRequest &req) {
    if (!cfg.ingestion_enabled) {
      return error_response({403, "ingestion_disabled", "ingestion is disabled in this deployment"});
    }
    std::vector<Document> docs;
    try {
      if (req.corpus_upload) {
        docs = parse_corpus_jsonl(*req.corpus_upload);
      } else {
        const auto body = parse_object(req.body);
        if (!body || !body->contains("corpus_path") || !body->at("corpus_path").is_string()) {
          return error_response({400, "malformed_request", "expected {\"corpus_path\": str} or a multipart corpus upload"});
        }
        docs = load_corpus(body->at("corpus_path").get<std::string>());
      }
    } catch (const Error &e) {
      if (e.code() == Errc::io_error) {
        return error_response({400, "malformed_request", e.what()});
      }
      return error_response({422, "malformed_corpus", e.what()});
    }

    try {
      const auto chunks = chunk_documents(docs, cfg.chunking);
      std::vector<std::string> texts;
      texts.reserve(chunks.size());
      for (const auto &c : chunks) {
        texts.push_back(c.text);
      }
      const auto vectors = embedder->embed_batch(texts);
      const auto dir = cfg.resolved_index_dir();
      index->update([&](KnowledgeIndex &next) {
        next.upsert_chunks(chunks, vectors);
        next.save(dir);
        return 0;
      });
      spdlog::info("ingested {} documents, {} chunks", docs.size(), chunks.size());
      return json_response(200, {{"documents", docs.size()}, {"chunks", chunks.size()}});
    } catch (const Error &e) {
      spdlog::error("ingest failed: {}", e.what());
      return error_response(from_error(e));
    }
  }

  void probe_all() {
    embedder->probe();
    generator->probe();
    vision->probe();
  }

  void probe_loop() {
    std::unique_lock lock(probe_mutex);
    while (!stopping) {
      lock.unlock();
      probe_all();
      lock.lock();
      probe_cv.wait_for(lock, std::chrono::seconds(cfg.probe_interval_s), [&] { return stopping; });
    }
  }

  bool has_remote() const {
    return embedder->status() != BackendStatus::stub || generator->status() != BackendStatus::stub ||
           vision->status() != BackendStatus::stub;
  }
};

Service::Service(ServiceConfig config, ServiceBackends backends, std::shared_ptr<const Clock> clock)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(backends), std::move(clock))) {}

Service::~Service() { stop(); }

ApiResponse Service::handle(const ApiRequest &request) {
  ApiResponse res;
  try {
    res = impl_->dispatch(request);
  } catch (const std::exception &e) {
    spdlog::error("unhandled error on {} {}: {}", request.method, request.path, e.what());
    res = error_response({500, "internal_error", e.what()});
  }
  impl_->add_cors(request, res);
  return res;
}

int Service::start() {
  auto &server = impl_->server;
  server.new_task_queue = [n = impl_->cfg.threads] { return new httplib::ThreadPool(static_cast<std::size_t>(n)); };
  // Oversized bodies are rejected by handle() with a JSON error; leave headroom
  // so they reach it.
  server.set_payload_max_length(impl_->cfg.max_body_bytes * 2 + 1024);
  server.set_error_handler([](const httplib::Request &, httplib::Response &res) {
    if (res.body.empty()) {
      const std::string code = res.status == 413 ? "payload_too_large" : res.status == 404 ? "not_found"
                               : res.status < 500                      ? "malformed_request"
                                                                        : "internal_error";
      res.set_content(json{{"error", {{"code", code}, {"message", httplib::status_message(res.status)}}}}.dump(),
                      "application/json");
    }
  });
  // Regular handlers, not a pre-routing hook: httplib reads the body only
  // after pre-routing, and parses multipart uploads only for routed POSTs.
  const auto adapter = [this](const httplib::Request &req, httplib::Response &res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto &[k, v] : req.headers) {
      api.headers[to_lower_ascii(k)] = v;
    }
    api.body = req.body;
    if (req.is_multipart_form_data() && req.has_file("corpus")) {
      api.corpus_upload = req.get_file_value("corpus").content;
    }
    const auto out = handle(api);
    res.status = out.status;
    for (const auto &[k, v] : out.headers) {
      res.set_header(k, v);
    }
    if (!out.body.empty()) {
      res.set_content(out.body, "application/json");
    }
    spdlog::debug("{} {} -> {}", req.method, req.path, out.status);
  };
  server.Get(".*", adapter);
  server.Post(".*", adapter);
  server.Put(".*", adapter);
  server.Delete(".*", adapter);
  server.Patch(".*", adapter);
  server.Options(".*", adapter);

  const auto &cfg = impl_->cfg;
  int port = cfg.port;
  if (port == 0) {
    port = server.bind_to_any_port(cfg.bind_address);
  } else if (!server.bind_to_port(cfg.bind_address, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(Errc::io_error, "cannot bind " + cfg.bind_address + ":" + std::to_string(cfg.port));
  }
  impl_->server_thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  if (impl_->has_remote()) {
    impl_->probe_thread = std::thread([this] { impl_->probe_loop(); });
  }
  spdlog::info("listening on {}:{}", cfg.bind_address, port);
  return port;
}

void Service::stop() {
  if (!impl_) {
    return;
  }
  {
    std::lock_guard lock(impl_->probe_mutex);
    impl_->stopping = true;
  }
  impl_->probe_cv.notify_all();
  if (impl_->server.is_running()) {
    impl_->server.stop();
  }
  if (impl_->server_thread.joinable()) {
    impl_->server_thread.join();
  }
  if (impl_->probe_thread.joinable()) {
    impl_->probe_thread.join();
  }
  flush();
}

void Service::wait() {
  if (impl_->server_thread.joinable()) {
    impl_->server_thread.join();
  }
}

void Service::flush() {
  impl_->sessions->flush();
  impl_->query_log->flush();
  impl_->feedback_log->flush();
}

void Service::probe_backends() { impl_->probe_all(); }

const ServiceConfig &Service::config() const noexcept { return impl_->cfg; }

std::shared_ptr<const KnowledgeIndex> Service::index() const { return impl_->index->snapshot(); }

} // namespace coop_rag
