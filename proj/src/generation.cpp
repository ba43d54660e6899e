#include "coop_rag/generation.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/http_client.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

namespace coop_rag {

using nlohmann::json;

namespace {

class RemoteGenerator final : public Generator {
public:
  explicit RemoteGenerator(RemoteEndpoint endpoint)
      : endpoint_(std::move(endpoint)), limiter_(static_cast<std::size_t>(endpoint_.max_in_flight)) {}

  std::string generate(const PromptBundle &bundle) const override {
    const bool openai = endpoint_.api_style == ApiStyle::openai;
    json body;
    if (openai) {
      body = {{"model", endpoint_.model_name},
              {"messages", json::array({{{"role", "user"}, {"content", bundle.rendered}}})},
              {"temperature", endpoint_.temperature}};
    } else {
      body = {{"model", endpoint_.model_name}, {"prompt", bundle.rendered}, {"temperature", endpoint_.temperature}};
    }
    const std::string path = openai ? "/chat/completions" : "/generate";
    const auto payload = body.dump();

    HttpResult res;
    {
      InFlightLimiter::Guard guard(limiter_);
      try {
        res = send(path, payload);
      } catch (const Error &e) {
        if (e.code() != Errc::transport && e.code() != Errc::timeout) {
          throw;
        }
        try {
          res = send(path, payload);
        } catch (const Error &) {
          status_.mark(false);
          throw;
        }
      }
    }
    status_.mark(true);
    if (res.status < 200 || res.status >= 300) {
      throw Error(Errc::bad_status, "generation backend " + endpoint_.base_url + " returned HTTP " +
                                        std::to_string(res.status));
    }
    std::string text;
    try {
      const auto doc = json::parse(res.body);
      text = openai ? doc.at("choices").at(0).at("message").at("content").get<std::string>()
                    : doc.at("text").get<std::string>();
    } catch (const json::exception &e) {
      throw Error(Errc::bad_response, std::string("malformed generation response: ") + e.what());
    }
    if (is_blank(text)) {
      throw Error(Errc::empty_completion, "generation backend " + endpoint_.base_url + " returned an empty completion");
    }
    return trim(text);
  }

  BackendStatus status() const noexcept override { return status_.get(); }
  void probe() const override { status_.mark(http_probe(endpoint_)); }

private:
  HttpResult send(const std::string &path, const std::string &payload) const {
    try {
      return http_post_json(endpoint_, path, payload);
    } catch (const Error &e) {
      throw Error(e.code(), std::string("generation backend: ") + e.what());
    }
  }

  RemoteEndpoint endpoint_;
  mutable InFlightLimiter limiter_;
  mutable StatusCell status_;
};

} // namespace

void GenerationSpec::validate() const {
  if (kind == GenerationKind::remote_http) {
    if (!remote) {
      throw Error(Errc::config_error, "remote_http generation backend requires a remote section");
    }
    remote->validate("generation");
  } else if (remote) {
    throw Error(Errc::config_error, "remote section is only valid for remote_http generation backends");
  }
}

std::string extractive_answer(std::span<const std::string> context_texts) {
  std::vector<std::string> parts;
  for (const auto &text : context_texts) {
    const auto sentences = split_sentences(text);
    for (std::size_t i = 0; i < sentences.size() && i < 2; ++i) {
      parts.push_back(sentences[i]);
    }
  }
  if (parts.empty()) {
    return std::string(kNoContextAnswer);
  }
  return join(parts, " ");
}

std::string ExtractiveGenerator::generate(const PromptBundle &bundle) const {
  return extractive_answer(bundle.context_texts);
}

std::unique_ptr<Generator> make_generator(const GenerationSpec &spec) {
  spec.validate();
  if (spec.kind == GenerationKind::remote_http) {
    return std::make_unique<RemoteGenerator>(*spec.remote);
  }
  return std::make_unique<ExtractiveGenerator>();
}

std::string generate_answer(const PromptBundle &bundle, const GenerationSpec &spec) {
  return make_generator(spec)->generate(bundle);
}

} // namespace coop_rag
