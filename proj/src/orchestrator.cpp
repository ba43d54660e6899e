#include "coop_rag/orchestrator.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

namespace coop_rag {

namespace {

void require(bool ok, const char *what) {
  if (!ok) {
    throw Error(Errc::invalid_argument, std::string("pipeline dependency missing: ") + what);
  }
}

std::string prompt_question(const PreparedQuery &q) {
  std::vector<std::string> parts;
  if (!is_blank(q.raw_text)) {
    parts.push_back(trim(q.raw_text));
  }
  if (q.image_caption) {
    parts.push_back("Image description: " + *q.image_caption);
  }
  return join(parts, "\n");
}

} // namespace

Answer handle_chat(const ChatRequest &request, const PipelineDeps &deps) {
  require(deps.index != nullptr, "index");
  require(deps.embedder != nullptr, "embedder");
  require(deps.generator != nullptr, "generator");
  require(deps.lexicon != nullptr, "lexicon");
  require(deps.sessions != nullptr, "sessions");
  const auto started = deps.clock->steady_now();

  if (is_blank(request.message) && !request.image) {
    throw Error(Errc::input_required, "a message or an image is required");
  }
  std::string session_id;
  if (request.session_id) {
    session_id = *request.session_id;
    if (!deps.sessions->exists(session_id)) {
      throw Error(Errc::unknown_session, "unknown session: " + session_id);
    }
  } else {
    session_id = deps.sessions->create(request.style.value_or(ResponseStyle::concise));
  }

  const auto index = deps.index->snapshot();
  return deps.sessions->with_session(session_id, [&](Session &session) {
    if (request.style) {
      session.style = *request.style;
    }
    Answer answer;
    answer.session_id = session_id;
    answer.style = session.style;

    const QueryDeps qdeps{*deps.lexicon, *deps.embedder, *index, deps.vision};
    const QueryOptions qopts{deps.config.retrieval, deps.config.ood_threshold, deps.config.min_correction_length};
    std::optional<std::string_view> image;
    if (request.image) {
      image = *request.image;
    }
    RetrievalResult retrieval;
    answer.prepared = prepare_query(request.message, image, qdeps, qopts, &retrieval);
    answer.warnings = answer.prepared.warnings;
    answer.ood = answer.prepared.ood_flag;
    const auto question = prompt_question(answer.prepared);

    if (answer.ood) {
      answer.generated = deps.config.clarification_message;
      answer.text = answer.generated;
    } else {
      answer.contexts = std::move(retrieval.contexts);
      std::vector<Chunk> chunks;
      chunks.reserve(answer.contexts.size());
      for (const auto &c : answer.contexts) {
        chunks.push_back(c.chunk);
        answer.contexts_used.push_back(c.chunk.chunk_id);
      }
      const auto bundle =
          assemble_prompt(session.turns, chunks, question, session.style, deps.config.history_window);
      answer.generated = deps.generator->generate(bundle);
      answer.citations = collect_citations(chunks);
      answer.text = append_citations(answer.generated, chunks);
    }

    answer.turn_index = session.turns.size();
    deps.sessions->record_turn(session, question, answer.generated, answer.contexts_used);
    const auto elapsed = deps.clock->steady_now() - started;
    answer.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    return answer;
  });
}

std::string generate_baseline(std::string_view question, ResponseStyle style, const Generator &generator) {
  const auto bundle = assemble_prompt({}, {}, question, style);
  return generator.generate(bundle);
}

} // namespace coop_rag
