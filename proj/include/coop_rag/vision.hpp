#pragma once

#include "coop_rag/backend.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace coop_rag {

enum class VisionKind { stub, remote_http };

struct VisionSpec {
  VisionKind kind = VisionKind::stub;
  std::optional<RemoteEndpoint> remote;
  // Stub only: caption per hex MurmurHash64A of the image bytes.
  std::map<std::string, std::string> stub_captions;
  std::string default_caption = "Photo of poultry; no specific abnormality is visible.";
  std::string prompt = "Describe visible poultry health signs, behavior and housing conditions in this image.";

  void validate() const;
};

class VisionBackend {
public:
  virtual ~VisionBackend() = default;
  // `image` is raw bytes of a supported format.
  virtual std::string caption(std::string_view image) const = 0;
  [[nodiscard]] virtual BackendStatus status() const noexcept = 0;
  virtual void probe() const {}
};

// "png", "jpeg", "gif" or "webp" from magic bytes; nullopt otherwise.
std::optional<std::string_view> detect_image_format(std::string_view bytes) noexcept;

std::unique_ptr<VisionBackend> make_vision_backend(const VisionSpec &spec);

// Validates the image then asks the backend. Throws Error(unsupported_image)
// for empty or unrecognized data, or the backend's error.
std::string caption_image(std::string_view image, const VisionBackend &backend);

} // namespace coop_rag
