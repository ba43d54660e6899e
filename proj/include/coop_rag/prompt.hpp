#pragma once

#include "coop_rag/corpus.hpp"

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

enum class ResponseStyle { concise, detailed };

std::string_view to_string(ResponseStyle s) noexcept;
std::optional<ResponseStyle> parse_style(std::string_view name) noexcept;

struct Turn {
  std::string question;
  std::string answer;
  std::chrono::system_clock::time_point timestamp;
  std::vector<std::string> contexts_used;

  bool operator==(const Turn &) const = default;
};

struct PromptBundle {
  std::string rendered;
  std::string history_block;
  std::string contexts_block;
  std::string question_block;
  // Raw context texts in rank order, for backends that work on them directly.
  std::vector<std::string> context_texts;
};

struct Citation {
  std::string source;
  std::string title;

  bool operator==(const Citation &) const = default;
};

inline constexpr std::size_t kDefaultHistoryWindow = 10;

std::string render_history(std::span<const Turn> turns);
std::string render_contexts(std::span<const Chunk> contexts);
std::string_view style_instruction(ResponseStyle style) noexcept;

// Renders the last `history_window` turns; older turns are left out.
PromptBundle assemble_prompt(std::span<const Turn> history, std::span<const Chunk> contexts,
                             std::string_view question, ResponseStyle style,
                             std::size_t history_window = kDefaultHistoryWindow);

// Distinct (source, title) pairs in first-use order.
std::vector<Citation> collect_citations(std::span<const Chunk> contexts);
std::string append_citations(std::string text, std::span<const Chunk> contexts);

} // namespace coop_rag
