#include "coop_rag/vision.hpp"

#include "coop_rag/base64.hpp"
#include "coop_rag/error.hpp"
#include "coop_rag/hash.hpp"
#include "coop_rag/http_client.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

namespace coop_rag {

using nlohmann::json;

namespace {

class StubVision final : public VisionBackend {
public:
  explicit StubVision(const VisionSpec &spec) : captions_(spec.stub_captions), fallback_(spec.default_caption) {}

  std::string caption(std::string_view image) const override {
    const auto it = captions_.find(to_hex(murmur64a(image)));
    return it == captions_.end() ? fallback_ : it->second;
  }
  BackendStatus status() const noexcept override { return BackendStatus::stub; }

private:
  std::map<std::string, std::string> captions_;
  std::string fallback_;
};

class RemoteVision final : public VisionBackend {
public:
  RemoteVision(RemoteEndpoint endpoint, std::string prompt)
      : endpoint_(std::move(endpoint)), prompt_(std::move(prompt)),
        limiter_(static_cast<std::size_t>(endpoint_.max_in_flight)) {}

  std::string caption(std::string_view image) const override {
    const auto payload = json{{"image_base64", base64::encode(image)}, {"prompt", prompt_}}.dump();
    HttpResult res;
    {
      InFlightLimiter::Guard guard(limiter_);
      try {
        res = http_post_json(endpoint_, "/caption", payload);
      } catch (const Error &e) {
        if (e.code() != Errc::transport && e.code() != Errc::timeout) {
          throw;
        }
        try {
          res = http_post_json(endpoint_, "/caption", payload);
        } catch (const Error &) {
          status_.mark(false);
          throw;
        }
      }
    }
    status_.mark(true);
    if (res.status < 200 || res.status >= 300) {
      throw Error(Errc::bad_status, "vision backend returned HTTP " + std::to_string(res.status));
    }
    std::string text;
    try {
      text = json::parse(res.body).at("caption").get<std::string>();
    } catch (const json::exception &e) {
      throw Error(Errc::bad_response, std::string("malformed vision response: ") + e.what());
    }
    if (is_blank(text)) {
      throw Error(Errc::empty_completion, "vision backend returned an empty caption");
    }
    return trim(text);
  }

  BackendStatus status() const noexcept override { return status_.get(); }
  void probe() const override { status_.mark(http_probe(endpoint_)); }

private:
  RemoteEndpoint endpoint_;
  std::string prompt_;
  mutable InFlightLimiter limiter_;
  mutable StatusCell status_;
};

bool starts_with(std::string_view s, std::string_view prefix) noexcept {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

} // namespace

void VisionSpec::validate() const {
  if (kind == VisionKind::remote_http) {
    if (!remote) {
      throw Error(Errc::config_error, "remote_http vision backend requires a remote section");
    }
    remote->validate("vision");
  } else if (remote) {
    throw Error(Errc::config_error, "remote section is only valid for remote_http vision backends");
  }
}

std::optional<std::string_view> detect_image_format(std::string_view b) noexcept {
  using namespace std::string_view_literals;
  if (starts_with(b, "\x89PNG\r\n\x1a\n"sv)) {
    return "png";
  }
  if (starts_with(b, "\xFF\xD8\xFF"sv)) {
    return "jpeg";
  }
  if (starts_with(b, "GIF87a"sv) || starts_with(b, "GIF89a"sv)) {
    return "gif";
  }
  if (b.size() >= 12 && starts_with(b, "RIFF"sv) && b.substr(8, 4) == "WEBP"sv) {
    return "webp";
  }
  return std::nullopt;
}

std::unique_ptr<VisionBackend> make_vision_backend(const VisionSpec &spec) {
  spec.validate();
  if (spec.kind == VisionKind::remote_http) {
    return std::make_unique<RemoteVision>(*spec.remote, spec.prompt);
  }
  return std::make_unique<StubVision>(spec);
}

std::string caption_image(std::string_view image, const VisionBackend &backend) {
  if (image.empty()) {
    throw Error(Errc::unsupported_image, "image is empty");
  }
  if (!detect_image_format(image)) {
    throw Error(Errc::unsupported_image, "unsupported image format (expected PNG, JPEG, GIF or WEBP)");
  }
  return backend.caption(image);
}

} // namespace coop_rag
