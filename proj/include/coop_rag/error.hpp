#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coop_rag {

enum class Errc {
  invalid_argument,
  empty_text,
  input_required,
  parse_error,
  duplicate_id,
  dimension_mismatch,
  not_found,
  unknown_session,
  io_error,
  missing_file,
  checksum_mismatch,
  index_empty,
  config_error,
  unsupported_image,
  transport,
  timeout,
  bad_status,
  bad_response,
  empty_completion,
};

// Coarse grouping used for CLI exit codes and HTTP status mapping.
enum class ErrorCategory { input, io, index, backend };

constexpr ErrorCategory category_of(Errc code) noexcept {
  switch (code) {
    case Errc::io_error:
    case Errc::missing_file:
    case Errc::checksum_mismatch:
      return ErrorCategory::io;
    case Errc::index_empty:
      return ErrorCategory::index;
    case Errc::transport:
    case Errc::timeout:
    case Errc::bad_status:
    case Errc::bad_response:
    case Errc::empty_completion:
      return ErrorCategory::backend;
    default:
      return ErrorCategory::input;
  }
}

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::empty_text: return "empty_text";
    case Errc::input_required: return "input_required";
    case Errc::parse_error: return "parse_error";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::not_found: return "not_found";
    case Errc::unknown_session: return "unknown_session";
    case Errc::io_error: return "io_error";
    case Errc::missing_file: return "missing_file";
    case Errc::checksum_mismatch: return "checksum_mismatch";
    case Errc::index_empty: return "index_empty";
    case Errc::config_error: return "config_error";
    case Errc::unsupported_image: return "unsupported_image";
    case Errc::transport: return "transport";
    case Errc::timeout: return "timeout";
    case Errc::bad_status: return "bad_status";
    case Errc::bad_response: return "bad_response";
    case Errc::empty_completion: return "empty_completion";
  }
  return "unknown";
}

/// Library-wide exception. `position()` carries a 1-based line number for
/// file parsing errors or a 0-based element index for batch operations.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &message, std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(message), code_(code), position_(position) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] ErrorCategory category() const noexcept { return category_of(code_); }
  [[nodiscard]] std::optional<std::size_t> position() const noexcept { return position_; }

private:
  Errc code_;
  std::optional<std::size_t> position_;
};

} // namespace coop_rag
