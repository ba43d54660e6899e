#include "coop_rag/prompt.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include <algorithm>

namespace coop_rag {

namespace {

constexpr std::string_view kPreamble =
    "Respond to the question based on the provided context and conversation history. Be concise and "
    "accurate. If the question refers to previous messages, use the history to provide context.";

std::string single_line(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

} // namespace

std::string_view to_string(ResponseStyle s) noexcept {
  return s == ResponseStyle::detailed ? "detailed" : "concise";
}

std::optional<ResponseStyle> parse_style(std::string_view name) noexcept {
  if (name == "concise") {
    return ResponseStyle::concise;
  }
  if (name == "detailed") {
    return ResponseStyle::detailed;
  }
  return std::nullopt;
}

std::string_view style_instruction(ResponseStyle style) noexcept {
  return style == ResponseStyle::detailed ? "Provide a detailed answer with practical recommendations."
                                          : "Answer in at most 120 words.";
}

std::string render_history(std::span<const Turn> turns) {
  if (turns.empty()) {
    return "(none)";
  }
  std::string out;
  for (const auto &t : turns) {
    if (!out.empty()) {
      out += "\n\n";
    }
    out += "User: " + t.question + "\nAssistant: " + t.answer;
  }
  return out;
}

std::string render_contexts(std::span<const Chunk> contexts) {
  if (contexts.empty()) {
    return "(none)";
  }
  std::string out;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto &c = contexts[i];
    if (i > 0) {
      out += '\n';
    }
    const auto &source = c.metadata.source.empty() ? c.doc_id : c.metadata.source;
    out += "[" + std::to_string(i + 1) + "] (" + source + ") " + single_line(c.text);
  }
  return out;
}

PromptBundle assemble_prompt(std::span<const Turn> history, std::span<const Chunk> contexts,
                             std::string_view question, ResponseStyle style, std::size_t history_window) {
  if (is_blank(question)) {
    throw Error(Errc::input_required, "question must not be empty");
  }
  if (history.size() > history_window) {
    history = history.subspan(history.size() - history_window);
  }
  PromptBundle b;
  b.history_block = render_history(history);
  b.contexts_block = render_contexts(contexts);
  b.question_block = std::string(question);
  for (const auto &c : contexts) {
    b.context_texts.push_back(c.text);
  }
  b.rendered.reserve(kPreamble.size() + b.history_block.size() + b.contexts_block.size() + question.size() + 160);
  b.rendered += kPreamble;
  b.rendered += "\n\nConversation History:\n";
  b.rendered += b.history_block;
  b.rendered += "\n\nRelevant Contexts from Knowledge Base:\n";
  b.rendered += b.contexts_block;
  b.rendered += "\n\nQuestion:\n";
  b.rendered += b.question_block;
  b.rendered += "\n\n";
  b.rendered += style_instruction(style);
  return b;
}

std::vector<Citation> collect_citations(std::span<const Chunk> contexts) {
  std::vector<Citation> out;
  for (const auto &c : contexts) {
    Citation cite{c.metadata.source.empty() ? c.doc_id : c.metadata.source, c.metadata.title};
    if (std::find(out.begin(), out.end(), cite) == out.end()) {
      out.push_back(std::move(cite));
    }
  }
  return out;
}

std::string append_citations(std::string text, std::span<const Chunk> contexts) {
  const auto cites = collect_citations(contexts);
  if (cites.empty()) {
    return text;
  }
  text += "\n\nSources:\n";
  for (std::size_t i = 0; i < cites.size(); ++i) {
    if (i > 0) {
      text += '\n';
    }
    text += "- " + cites[i].source + ": " + cites[i].title;
  }
  return text;
}

} // namespace coop_rag
