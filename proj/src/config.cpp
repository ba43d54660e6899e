#include "coop_rag/config.hpp"

#include "coop_rag/error.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace coop_rag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string &path, const std::string &what) {
  throw Error(Errc::config_error, "config " + path + ": " + what);
}

void check_keys(const json &obj, const std::string &path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    bad(path.empty() ? "<root>" : path, "expected an object");
  }
  for (const auto &[key, _] : obj.items()) {
    bool ok = false;
    for (const auto a : allowed) {
      ok = ok || a == key;
    }
    if (!ok) {
      bad(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

template <typename T>
void read(const json &obj, const std::string &path, const char *key, T &out) {
  if (!obj.contains(key)) {
    return;
  }
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception &) {
    bad(path.empty() ? key : path + "." + key, "wrong type");
  }
}

void read_path(const json &obj, const std::string &path, const char *key, fs::path &out) {
  std::string s;
  if (obj.contains(key)) {
    read(obj, path, key, s);
    out = s;
  }
}

RemoteEndpoint read_remote(const json &obj, const std::string &path) {
  check_keys(obj, path,
             {"base_url", "model_name", "auth_env_var", "timeout_ms", "max_in_flight", "temperature", "api_style"});
  RemoteEndpoint r;
  read(obj, path, "base_url", r.base_url);
  read(obj, path, "model_name", r.model_name);
  read(obj, path, "auth_env_var", r.auth_env_var);
  read(obj, path, "timeout_ms", r.timeout_ms);
  read(obj, path, "max_in_flight", r.max_in_flight);
  read(obj, path, "temperature", r.temperature);
  std::string style = "native";
  read(obj, path, "api_style", style);
  if (style == "native") {
    r.api_style = ApiStyle::native;
  } else if (style == "openai") {
    r.api_style = ApiStyle::openai;
  } else {
    bad(path + ".api_style", "expected \"native\" or \"openai\"");
  }
  return r;
}

json remote_to_json(const RemoteEndpoint &r) {
  return {{"base_url", r.base_url},
          {"model_name", r.model_name},
          {"auth_env_var", r.auth_env_var},
          {"timeout_ms", r.timeout_ms},
          {"max_in_flight", r.max_in_flight},
          {"temperature", r.temperature},
          {"api_style", r.api_style == ApiStyle::openai ? "openai" : "native"}};
}

void range(bool ok, const std::string &key, const std::string &what) {
  if (!ok) {
    bad(key, what);
  }
}

} // namespace

void ServiceConfig::validate() const {
  range(port >= 0 && port <= 65535, "port", "must be in [0, 65535]");
  range(!bind_address.empty(), "bind_address", "must not be empty");
  try {
    chunking.validate();
    retrieval.validate();
  } catch (const Error &e) {
    throw Error(Errc::config_error, std::string("config: ") + e.what());
  }
  range(bm25.k1 >= 0.0, "bm25.k1", "must be non-negative");
  range(bm25.b >= 0.0 && bm25.b <= 1.0, "bm25.b", "must be in [0, 1]");
  embedder.validate();
  generation.validate();
  vision.validate();
  range(ood_threshold >= 0.0 && ood_threshold <= 1.0, "ood_threshold", "must be in [0, 1]");
  range(history_window >= 1, "history_window", "must be at least 1");
  range(!clarification_message.empty(), "clarification_message", "must not be empty");
  range(max_body_bytes > 0, "limits.max_body_bytes", "must be positive");
  range(max_image_base64_bytes > 0, "limits.max_image_base64_bytes", "must be positive");
  range(threads >= 1 && threads <= 1024, "threads", "must be in [1, 1024]");
  range(probe_interval_s >= 1, "probe_interval_s", "must be at least 1");
}

fs::path ServiceConfig::resolved_index_dir() const { return index_dir ? *index_dir : data_dir / "index"; }

PipelineConfig ServiceConfig::pipeline() const {
  PipelineConfig p;
  p.retrieval = retrieval;
  p.ood_threshold = ood_threshold;
  p.history_window = history_window;
  p.clarification_message = clarification_message;
  return p;
}

ServiceConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw Error(Errc::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "",
             {"bind_address", "port", "data_dir", "index_dir", "chunking", "retrieval", "bm25", "embedder",
              "generation", "vision", "lexicon_path", "ood_threshold", "history_window", "clarification_message",
              "limits", "ingestion_enabled", "cors_origins", "auth_token_env", "threads", "probe_interval_s"});
  ServiceConfig c;
  read(doc, "", "bind_address", c.bind_address);
  read(doc, "", "port", c.port);
  read_path(doc, "", "data_dir", c.data_dir);
  if (doc.contains("index_dir")) {
    fs::path p;
    read_path(doc, "", "index_dir", p);
    c.index_dir = p;
  }
  if (doc.contains("chunking")) {
    const auto &o = doc.at("chunking");
    check_keys(o, "chunking", {"max_chars", "overlap_chars", "separators"});
    read(o, "chunking", "max_chars", c.chunking.max_chars);
    read(o, "chunking", "overlap_chars", c.chunking.overlap_chars);
    read(o, "chunking", "separators", c.chunking.separators);
  }
  if (doc.contains("retrieval")) {
    const auto &o = doc.at("retrieval");
    check_keys(o, "retrieval", {"alpha", "k", "lambda", "pool_size", "boost_per_keyword", "boost_cap"});
    read(o, "retrieval", "alpha", c.retrieval.alpha);
    read(o, "retrieval", "k", c.retrieval.k);
    read(o, "retrieval", "lambda", c.retrieval.lambda);
    read(o, "retrieval", "pool_size", c.retrieval.pool_size);
    read(o, "retrieval", "boost_per_keyword", c.retrieval.boost_per_keyword);
    read(o, "retrieval", "boost_cap", c.retrieval.boost_cap);
  }
  if (doc.contains("bm25")) {
    const auto &o = doc.at("bm25");
    check_keys(o, "bm25", {"k1", "b"});
    read(o, "bm25", "k1", c.bm25.k1);
    read(o, "bm25", "b", c.bm25.b);
  }
  if (doc.contains("embedder")) {
    const auto &o = doc.at("embedder");
    check_keys(o, "embedder", {"kind", "dims", "remote"});
    std::string kind = "deterministic_hash";
    read(o, "embedder", "kind", kind);
    if (kind == "deterministic_hash") {
      c.embedder.kind = EmbedderKind::deterministic_hash;
    } else if (kind == "remote_http") {
      c.embedder.kind = EmbedderKind::remote_http;
    } else {
      bad("embedder.kind", "expected \"deterministic_hash\" or \"remote_http\"");
    }
    read(o, "embedder", "dims", c.embedder.dims);
    if (o.contains("remote")) {
      c.embedder.remote = read_remote(o.at("remote"), "embedder.remote");
    }
  }
  if (doc.contains("generation")) {
    const auto &o = doc.at("generation");
    check_keys(o, "generation", {"kind", "remote"});
    std::string kind = "extractive_stub";
    read(o, "generation", "kind", kind);
    if (kind == "extractive_stub") {
      c.generation.kind = GenerationKind::extractive_stub;
    } else if (kind == "remote_http") {
      c.generation.kind = GenerationKind::remote_http;
    } else {
      bad("generation.kind", "expected \"extractive_stub\" or \"remote_http\"");
    }
    if (o.contains("remote")) {
      c.generation.remote = read_remote(o.at("remote"), "generation.remote");
    }
  }
  if (doc.contains("vision")) {
    const auto &o = doc.at("vision");
    check_keys(o, "vision", {"kind", "remote", "stub_captions", "default_caption", "prompt"});
    std::string kind = "stub";
    read(o, "vision", "kind", kind);
    if (kind == "stub") {
      c.vision.kind = VisionKind::stub;
    } else if (kind == "remote_http") {
      c.vision.kind = VisionKind::remote_http;
    } else {
      bad("vision.kind", "expected \"stub\" or \"remote_http\"");
    }
    if (o.contains("remote")) {
      c.vision.remote = read_remote(o.at("remote"), "vision.remote");
    }
    read(o, "vision", "stub_captions", c.vision.stub_captions);
    read(o, "vision", "default_caption", c.vision.default_caption);
    read(o, "vision", "prompt", c.vision.prompt);
  }
  if (doc.contains("lexicon_path")) {
    fs::path p;
    read_path(doc, "", "lexicon_path", p);
    c.lexicon_path = p;
  }
  read(doc, "", "ood_threshold", c.ood_threshold);
  read(doc, "", "history_window", c.history_window);
  read(doc, "", "clarification_message", c.clarification_message);
  if (doc.contains("limits")) {
    const auto &o = doc.at("limits");
    check_keys(o, "limits", {"max_body_bytes", "max_image_base64_bytes"});
    read(o, "limits", "max_body_bytes", c.max_body_bytes);
    read(o, "limits", "max_image_base64_bytes", c.max_image_base64_bytes);
  }
  read(doc, "", "ingestion_enabled", c.ingestion_enabled);
  read(doc, "", "cors_origins", c.cors_origins);
  read(doc, "", "auth_token_env", c.auth_token_env);
  read(doc, "", "threads", c.threads);
  read(doc, "", "probe_interval_s", c.probe_interval_s);
  c.validate();
  return c;
}

ServiceConfig load_config(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot read config " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ServiceConfig resolve_config(const std::optional<fs::path> &explicit_path) {
  if (explicit_path) {
    return load_config(*explicit_path);
  }
  if (const char *env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
    return load_config(env);
  }
  ServiceConfig c;
  c.validate();
  return c;
}

std::string config_to_json(const ServiceConfig &c) {
  json doc = {
      {"bind_address", c.bind_address},
      {"port", c.port},
      {"data_dir", c.data_dir.string()},
      {"chunking",
       {{"max_chars", c.chunking.max_chars},
        {"overlap_chars", c.chunking.overlap_chars},
        {"separators", c.chunking.separators}}},
      {"retrieval",
       {{"alpha", c.retrieval.alpha},
        {"k", c.retrieval.k},
        {"lambda", c.retrieval.lambda},
        {"pool_size", c.retrieval.pool_size},
        {"boost_per_keyword", c.retrieval.boost_per_keyword},
        {"boost_cap", c.retrieval.boost_cap}}},
      {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
      {"embedder",
       {{"kind", c.embedder.kind == EmbedderKind::remote_http ? "remote_http" : "deterministic_hash"},
        {"dims", c.embedder.dims}}},
      {"generation",
       {{"kind", c.generation.kind == GenerationKind::remote_http ? "remote_http" : "extractive_stub"}}},
      {"vision",
       {{"kind", c.vision.kind == VisionKind::remote_http ? "remote_http" : "stub"},
        {"stub_captions", c.vision.stub_captions},
        {"default_caption", c.vision.default_caption},
        {"prompt", c.vision.prompt}}},
      {"ood_threshold", c.ood_threshold},
      {"history_window", c.history_window},
      {"clarification_message", c.clarification_message},
      {"limits", {{"max_body_bytes", c.max_body_bytes}, {"max_image_base64_bytes", c.max_image_base64_bytes}}},
      {"ingestion_enabled", c.ingestion_enabled},
      {"cors_origins", c.cors_origins},
      {"auth_token_env", c.auth_token_env},
      {"threads", c.threads},
      {"probe_interval_s", c.probe_interval_s}};
  if (c.index_dir) {
    doc["index_dir"] = c.index_dir->string();
  }
  if (c.lexicon_path) {
    doc["lexicon_path"] = c.lexicon_path->string();
  }
  if (c.embedder.remote) {
    doc["embedder"]["remote"] = remote_to_json(*c.embedder.remote);
  }
  if (c.generation.remote) {
    doc["generation"]["remote"] = remote_to_json(*c.generation.remote);
  }
  if (c.vision.remote) {
    doc["vision"]["remote"] = remote_to_json(*c.vision.remote);
  }
  return doc.dump(2);
}

} // namespace coop_rag
