#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace coop_rag::base64 {

std::string encode(std::string_view bytes);

// Standard alphabet with padding; whitespace is ignored. Returns nullopt on
// any other malformed input.
std::optional<std::string> decode(std::string_view text);

} // namespace coop_rag::base64
