#include "coop_rag/embedding.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/hash.hpp"
#include "coop_rag/http_client.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

#include <cmath>

namespace coop_rag {

using nlohmann::json;

namespace {

template <typename T>
EmbeddingVector normalize_values(std::span<const T> values) {
  double sum = 0.0;
  for (const auto v : values) {
    sum += static_cast<double>(v) * static_cast<double>(v);
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(Errc::invalid_argument, "cannot normalize a zero or non-finite vector");
  }
  const double norm = std::sqrt(sum);
  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(values[i]) / norm);
  }
  return EmbeddingVector(std::move(out));
}

void require_text(std::string_view text, std::optional<std::size_t> index = std::nullopt) {
  if (is_blank(text)) {
    if (index) {
      throw Error(Errc::empty_text, "text at index " + std::to_string(*index) + " is empty", index);
    }
    throw Error(Errc::empty_text, "cannot embed empty or whitespace-only text");
  }
}

constexpr std::size_t kRemoteBatch = 64;

class RemoteEmbedder final : public Embedder {
public:
  RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dims)
      : endpoint_(std::move(endpoint)), dims_(dims),
        limiter_(static_cast<std::size_t>(endpoint_.max_in_flight)) {}

  EmbeddingVector embed(std::string_view text) const override {
    require_text(text);
    const std::string copy(text);
    return request({&copy, 1}).front();
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      require_text(texts[i], i);
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += kRemoteBatch) {
      const auto count = std::min(kRemoteBatch, texts.size() - start);
      auto part = request(texts.subspan(start, count));
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return out;
  }

  std::size_t dims() const noexcept override { return dims_; }

  std::string fingerprint() const override {
    return "remote_http:" + endpoint_.model_name + ":dims=" + std::to_string(dims_);
  }

  BackendStatus status() const noexcept override { return status_.get(); }

  void probe() const override { status_.mark(http_probe(endpoint_)); }

private:
  std::vector<EmbeddingVector> request(std::span<const std::string> texts) const {
    json body;
    std::string path;
    if (endpoint_.api_style == ApiStyle::openai) {
      body = {{"model", endpoint_.model_name}, {"input", texts}};
      path = "/embeddings";
    } else {
      body = {{"model", endpoint_.model_name}, {"inputs", texts}};
      path = "/embed";
    }
    const auto payload = body.dump();

    HttpResult res;
    {
      InFlightLimiter::Guard guard(limiter_);
      try {
        res = http_post_json(endpoint_, path, payload);
      } catch (const Error &e) {
        if (e.code() != Errc::transport && e.code() != Errc::timeout) {
          throw;
        }
        try {
          res = http_post_json(endpoint_, path, payload);
        } catch (const Error &) {
          status_.mark(false);
          throw;
        }
      }
    }
    status_.mark(true);
    if (res.status < 200 || res.status >= 300) {
      throw Error(Errc::bad_status,
                  "embedding backend returned HTTP " + std::to_string(res.status));
    }
    return parse(res.body, texts.size());
  }

  std::vector<EmbeddingVector> parse(const std::string &text, std::size_t expected) const {
    std::vector<std::vector<double>> rows;
    try {
      const auto doc = json::parse(text);
      if (endpoint_.api_style == ApiStyle::openai) {
        for (const auto &item : doc.at("data")) {
          rows.push_back(item.at("embedding").get<std::vector<double>>());
        }
      } else {
        rows = doc.at("vectors").get<std::vector<std::vector<double>>>();
      }
    } catch (const json::exception &e) {
      throw Error(Errc::bad_response, std::string("malformed embedding response: ") + e.what());
    }
    if (rows.size() != expected) {
      throw Error(Errc::bad_response, "embedding backend returned " + std::to_string(rows.size()) +
                                          " vectors for " + std::to_string(expected) + " inputs");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(rows.size());
    for (const auto &row : rows) {
      if (row.size() != dims_) {
        throw Error(Errc::dimension_mismatch, "embedding backend returned " +
                                                  std::to_string(row.size()) + " dims, expected " +
                                                  std::to_string(dims_));
      }
      try {
        out.push_back(EmbeddingVector::normalized(std::span<const double>(row)));
      } catch (const Error &) {
        throw Error(Errc::bad_response, "embedding backend returned a zero vector");
      }
    }
    return out;
  }

  RemoteEndpoint endpoint_;
  std::size_t dims_;
  mutable InFlightLimiter limiter_;
  mutable StatusCell status_;
};

} // namespace

EmbeddingVector EmbeddingVector::normalized(std::span<const double> values) {
  return normalize_values(values);
}

EmbeddingVector EmbeddingVector::normalized(std::span<const float> values) {
  return normalize_values(values);
}

double EmbeddingVector::norm() const noexcept { return std::sqrt(dot(values_, values_)); }

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  // Four independent accumulators; fixed order keeps results reproducible.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) {
    s0 += static_cast<double>(a[i]) * b[i];
  }
  return (s0 + s1) + (s2 + s3);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::dimension_mismatch, "cosine of vectors with " + std::to_string(a.size()) +
                                              " and " + std::to_string(b.size()) + " dims");
  }
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) {
    throw Error(Errc::invalid_argument, "cosine of a zero-norm vector");
  }
  return dot(a, b) / (na * nb);
}

double cosine_similarity(const EmbeddingVector &a, const EmbeddingVector &b) {
  return cosine_similarity(a.values(), b.values());
}

void EmbedderSpec::validate() const {
  if (dims == 0) {
    throw Error(Errc::config_error, "embedder dims must be positive");
  }
  if (kind == EmbedderKind::remote_http) {
    if (!remote) {
      throw Error(Errc::config_error, "remote_http embedder requires a remote section");
    }
    remote->validate("embedder");
  } else if (remote) {
    throw Error(Errc::config_error, "remote section is only valid for remote_http embedders");
  }
}

std::string EmbedderSpec::fingerprint() const {
  if (kind == EmbedderKind::remote_http) {
    return "remote_http:" + (remote ? remote->model_name : std::string()) +
           ":dims=" + std::to_string(dims);
  }
  return HashEmbedder(dims).fingerprint();
}

HashEmbedder::HashEmbedder(std::size_t dims) : dims_(dims) {
  if (dims_ == 0) {
    throw Error(Errc::invalid_argument, "embedder dims must be positive");
  }
}

std::string HashEmbedder::normalize(std::string_view text) {
  const auto decoded = utf8::decode(to_lower_ascii(text));
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const auto cp : decoded.code_points) {
    if (utf8::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(out, cp);
  }
  return out;
}

std::vector<std::string> HashEmbedder::grams(std::string_view normalized) {
  const auto decoded = utf8::decode(normalized);
  const auto n = decoded.size();
  std::vector<std::string> out;
  if (n == 0) {
    return out;
  }
  if (n < 3) {
    out.emplace_back(normalized);
    return out;
  }
  out.reserve(n - 2);
  for (std::size_t i = 0; i + 3 <= n; ++i) {
    const auto begin = decoded.offsets[i];
    out.emplace_back(normalized.substr(begin, decoded.offsets[i + 3] - begin));
  }
  return out;
}

EmbeddingVector HashEmbedder::embed(std::string_view text) const {
  require_text(text);
  std::vector<double> counts(dims_, 0.0);
  for (const auto &gram : grams(normalize(text))) {
    counts[murmur64a(gram) % dims_] += 1.0;
  }
  return EmbeddingVector::normalized(std::span<const double>(counts));
}

std::vector<EmbeddingVector> HashEmbedder::embed_batch(std::span<const std::string> texts) const {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    require_text(texts[i], i);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto &t : texts) {
    out.push_back(embed(t));
  }
  return out;
}

std::string HashEmbedder::fingerprint() const {
  return "deterministic_hash:murmur64a:seed=0:char3:dims=" + std::to_string(dims_);
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec &spec) {
  spec.validate();
  if (spec.kind == EmbedderKind::remote_http) {
    return std::make_unique<RemoteEmbedder>(*spec.remote, spec.dims);
  }
  return std::make_unique<HashEmbedder>(spec.dims);
}

EmbeddingVector embed_text(std::string_view text, const EmbedderSpec &spec) {
  return make_embedder(spec)->embed(text);
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbedderSpec &spec) {
  return make_embedder(spec)->embed_batch(texts);
}

} // namespace coop_rag
