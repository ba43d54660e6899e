#pragma once

#include "coop_rag/backend.hpp"
#include "coop_rag/prompt.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>

namespace coop_rag {

enum class GenerationKind { extractive_stub, remote_http };

struct GenerationSpec {
  GenerationKind kind = GenerationKind::extractive_stub;
  std::optional<RemoteEndpoint> remote;

  void validate() const;
};

inline constexpr std::string_view kNoContextAnswer = "No relevant context found.";

class Generator {
public:
  virtual ~Generator() = default;
  virtual std::string generate(const PromptBundle &bundle) const = 0;
  [[nodiscard]] virtual BackendStatus status() const noexcept = 0;
  virtual void probe() const {}
};

/// First two sentences of each context in rank order, space-joined.
class ExtractiveGenerator final : public Generator {
public:
  std::string generate(const PromptBundle &bundle) const override;
  BackendStatus status() const noexcept override { return BackendStatus::stub; }
};

std::string extractive_answer(std::span<const std::string> context_texts);

std::unique_ptr<Generator> make_generator(const GenerationSpec &spec);

std::string generate_answer(const PromptBundle &bundle, const GenerationSpec &spec);

} // namespace coop_rag
