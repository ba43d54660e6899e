#include "coop_rag/index.hpp"

#include "coop_rag/clock.hpp"
#include "coop_rag/error.hpp"
#include "coop_rag/hash.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace coop_rag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr const char *kManifest = "manifest.json";
constexpr const char *kChunks = "chunks.jsonl";
constexpr const char *kEmbeddings = "embeddings.bin";
constexpr const char *kPostings = "postings.jsonl";

std::string read_all(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const fs::path &path, const std::string &data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(Errc::io_error, "cannot write " + path.string());
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw Error(Errc::io_error, "write failed for " + path.string());
  }
}

json chunk_to_json(const Chunk &c) {
  json meta = {{"title", c.metadata.title},
               {"source", c.metadata.source},
               {"publication_date", c.metadata.publication_date ? json(*c.metadata.publication_date) : json(nullptr)},
               {"topics", c.metadata.topics},
               {"relevance_score", c.metadata.relevance_score ? json(*c.metadata.relevance_score) : json(nullptr)}};
  return {{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id},     {"ordinal", c.ordinal},
          {"text", c.text},         {"char_span", {c.span.start, c.span.end}}, {"metadata", meta}};
}

Chunk chunk_from_json(const json &j) {
  Chunk c;
  c.chunk_id = j.at("chunk_id").get<std::string>();
  c.doc_id = j.at("doc_id").get<std::string>();
  c.ordinal = j.at("ordinal").get<std::size_t>();
  c.text = j.at("text").get<std::string>();
  const auto &span = j.at("char_span");
  c.span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
  const auto &meta = j.at("metadata");
  c.metadata.title = meta.at("title").get<std::string>();
  c.metadata.source = meta.at("source").get<std::string>();
  if (!meta.at("publication_date").is_null()) {
    c.metadata.publication_date = meta.at("publication_date").get<std::string>();
  }
  c.metadata.topics = meta.at("topics").get<std::vector<std::string>>();
  if (meta.contains("relevance_score") && !meta.at("relevance_score").is_null()) {
    c.metadata.relevance_score = meta.at("relevance_score").get<double>();
  }
  return c;
}

std::string encode_floats(const std::vector<EmbeddingVector> &vectors, std::size_t dims) {
  std::string out(vectors.size() * dims * sizeof(float), '\0');
  char *dst = out.data();
  for (const auto &v : vectors) {
    for (const float f : v.values()) {
      auto bits = std::bit_cast<std::uint32_t>(f);
      if constexpr (std::endian::native == std::endian::big) {
        bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
      }
      std::memcpy(dst, &bits, sizeof(bits));
      dst += sizeof(bits);
    }
  }
  return out;
}

std::vector<float> decode_floats(const char *src, std::size_t count) {
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, src + i * sizeof(bits), sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
      bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
    }
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

json file_entry(const std::string &data) {
  return {{"bytes", data.size()}, {"checksum", to_hex(murmur64a(data))}};
}

} // namespace

KnowledgeIndex::KnowledgeIndex(std::size_t dims, std::string embedder_fingerprint, Bm25Params bm25)
    : dims_(dims), fingerprint_(std::move(embedder_fingerprint)), bm25_(bm25),
      created_at_(format_utc(std::chrono::system_clock::now())) {
  if (dims_ == 0) {
    throw Error(Errc::invalid_argument, "index dims must be positive");
  }
}

std::size_t KnowledgeIndex::upsert_chunks(std::span<const Chunk> chunks,
                                          std::span<const EmbeddingVector> vectors) {
  if (chunks.size() != vectors.size()) {
    throw Error(Errc::invalid_argument, "upsert of " + std::to_string(chunks.size()) +
                                            " chunks with " + std::to_string(vectors.size()) +
                                            " vectors");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dims() != dims_) {
      throw Error(Errc::dimension_mismatch,
                  "vector " + std::to_string(i) + " has " + std::to_string(vectors[i].dims()) +
                      " dims, index has " + std::to_string(dims_),
                  i);
    }
    if (chunks[i].chunk_id.empty()) {
      throw Error(Errc::invalid_argument, "chunk " + std::to_string(i) + " has an empty chunk_id", i);
    }
  }

  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto found = row_by_id_.find(chunks[i].chunk_id);
    std::uint32_t row = 0;
    if (found != row_by_id_.end()) {
      row = found->second;
      unindex_row(row);
      chunks_[row] = chunks[i];
      vectors_[row] = vectors[i];
      norms_[row] = vectors[i].norm();
    } else {
      row = static_cast<std::uint32_t>(chunks_.size());
      chunks_.push_back(chunks[i]);
      vectors_.push_back(vectors[i]);
      norms_.push_back(vectors[i].norm());
      doc_len_.push_back(0);
      row_by_id_.emplace(chunks[i].chunk_id, row);
    }
    index_row(row);
  }
  recompute_avg();
  return chunks.size();
}

void KnowledgeIndex::index_row(std::uint32_t row) {
  std::map<std::string, std::uint32_t> counts;
  const auto tokens = tokenize(chunks_[row].text);
  for (const auto &t : tokens) {
    ++counts[t];
  }
  doc_len_[row] = static_cast<std::uint32_t>(tokens.size());
  for (const auto &[term, tf] : counts) {
    auto &list = postings_[term];
    const auto at = std::lower_bound(list.begin(), list.end(), row,
                                     [](const Posting &p, std::uint32_t r) { return p.row < r; });
    list.insert(at, Posting{row, tf});
  }
}

void KnowledgeIndex::unindex_row(std::uint32_t row) {
  std::unordered_set<std::string> terms;
  for (auto &t : tokenize(chunks_[row].text)) {
    terms.insert(std::move(t));
  }
  for (const auto &term : terms) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) {
      continue;
    }
    auto &list = it->second;
    std::erase_if(list, [row](const Posting &p) { return p.row == row; });
    if (list.empty()) {
      postings_.erase(it);
    }
  }
  doc_len_[row] = 0;
}

void KnowledgeIndex::recompute_avg() {
  if (doc_len_.empty()) {
    avg_doc_len_ = 0.0;
    return;
  }
  const auto total = std::accumulate(doc_len_.begin(), doc_len_.end(), std::uint64_t{0});
  avg_doc_len_ = static_cast<double>(total) / static_cast<double>(doc_len_.size());
}

double KnowledgeIndex::idf(std::size_t df) const noexcept {
  const auto n = static_cast<double>(chunks_.size());
  const auto d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double KnowledgeIndex::term_weight(double idf_value, std::uint32_t tf, std::uint32_t len) const noexcept {
  const double f = tf;
  const double norm_len = avg_doc_len_ > 0.0 ? static_cast<double>(len) / avg_doc_len_ : 0.0;
  return idf_value * (f * (bm25_.k1 + 1.0)) / (f + bm25_.k1 * (1.0 - bm25_.b + bm25_.b * norm_len));
}

std::vector<std::string> KnowledgeIndex::distinct_terms(std::span<const std::string> tokens) const {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const auto &t : tokens) {
    if (!t.empty() && seen.insert(t).second) {
      out.push_back(t);
    }
  }
  return out;
}

std::size_t KnowledgeIndex::row_of(std::string_view chunk_ref) const {
  const auto it = row_by_id_.find(std::string(chunk_ref));
  if (it == row_by_id_.end()) {
    throw Error(Errc::not_found, "unknown chunk: " + std::string(chunk_ref));
  }
  return it->second;
}

bool KnowledgeIndex::contains(std::string_view chunk_ref) const {
  return row_by_id_.contains(std::string(chunk_ref));
}

const Chunk &KnowledgeIndex::chunk(std::string_view chunk_ref) const { return chunks_[row_of(chunk_ref)]; }

const EmbeddingVector &KnowledgeIndex::embedding(std::string_view chunk_ref) const {
  return vectors_[row_of(chunk_ref)];
}

std::size_t KnowledgeIndex::doc_length(std::string_view chunk_ref) const {
  return doc_len_[row_of(chunk_ref)];
}

std::span<const Posting> KnowledgeIndex::postings(std::string_view term) const {
  const auto it = postings_.find(std::string(term));
  if (it == postings_.end()) {
    return {};
  }
  return it->second;
}

std::vector<ScoredHit> KnowledgeIndex::vector_search(const EmbeddingVector &query, std::size_t n) const {
  if (query.dims() != dims_) {
    throw Error(Errc::dimension_mismatch, "query has " + std::to_string(query.dims()) +
                                              " dims, index has " + std::to_string(dims_));
  }
  const double qn = query.norm();
  if (qn == 0.0) {
    throw Error(Errc::invalid_argument, "query vector has zero norm");
  }
  std::vector<double> scores(chunks_.size());
  for (std::size_t row = 0; row < chunks_.size(); ++row) {
    scores[row] = dot(query.values(), vectors_[row].values()) / (qn * norms_[row]);
  }
  std::vector<std::uint32_t> order(chunks_.size());
  std::iota(order.begin(), order.end(), 0u);
  const auto take = std::min(n, order.size());
  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) {
      return scores[a] > scores[b];
    }
    return chunks_[a].chunk_id < chunks_[b].chunk_id;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  std::vector<ScoredHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back({chunks_[order[i]].chunk_id, scores[order[i]], HitKind::semantic});
  }
  return hits;
}

double KnowledgeIndex::semantic_similarity(const EmbeddingVector &query, std::string_view chunk_ref) const {
  return cosine_similarity(query, vectors_[row_of(chunk_ref)]);
}

double KnowledgeIndex::bm25_score(std::span<const std::string> query_tokens,
                                  std::string_view chunk_ref) const {
  const auto row = static_cast<std::uint32_t>(row_of(chunk_ref));
  double score = 0.0;
  for (const auto &term : distinct_terms(query_tokens)) {
    const auto list = postings(term);
    const auto at = std::lower_bound(list.begin(), list.end(), row,
                                     [](const Posting &p, std::uint32_t r) { return p.row < r; });
    if (at == list.end() || at->row != row) {
      continue;
    }
    score += term_weight(idf(list.size()), at->tf, doc_len_[row]);
  }
  return score;
}

std::vector<ScoredHit> KnowledgeIndex::lexical_search(std::span<const std::string> query_tokens,
                                                      std::size_t n) const {
  std::vector<double> scores(chunks_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto &term : distinct_terms(query_tokens)) {
    const auto list = postings(term);
    if (list.empty()) {
      continue;
    }
    const double w = idf(list.size());
    for (const auto &p : list) {
      if (scores[p.row] == 0.0) {
        touched.push_back(p.row);
      }
      scores[p.row] += term_weight(w, p.tf, doc_len_[p.row]);
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::erase_if(touched, [&](std::uint32_t row) { return !(scores[row] > 0.0); });

  const auto take = std::min(n, touched.size());
  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) {
      return scores[a] > scores[b];
    }
    return chunks_[a].chunk_id < chunks_[b].chunk_id;
  };
  std::partial_sort(touched.begin(), touched.begin() + static_cast<std::ptrdiff_t>(take), touched.end(), better);
  std::vector<ScoredHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back({chunks_[touched[i]].chunk_id, scores[touched[i]], HitKind::lexical});
  }
  return hits;
}

IndexManifest KnowledgeIndex::manifest() const {
  IndexManifest m;
  m.dims = dims_;
  m.chunk_count = chunks_.size();
  m.bm25 = bm25_;
  m.avg_doc_len = avg_doc_len_;
  m.created_at = created_at_;
  m.embedder_fingerprint = fingerprint_;
  return m;
}

IndexManifest KnowledgeIndex::save(const fs::path &dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  }

  std::string chunks_data;
  for (const auto &c : chunks_) {
    chunks_data += chunk_to_json(c).dump();
    chunks_data += '\n';
  }

  const auto embeddings_data = encode_floats(vectors_, dims_);

  std::map<std::string, std::vector<Posting>> sorted_terms(postings_.begin(), postings_.end());
  std::string postings_data;
  for (const auto &[term, list] : sorted_terms) {
    std::vector<std::pair<std::string, std::uint32_t>> entries;
    entries.reserve(list.size());
    for (const auto &p : list) {
      entries.emplace_back(chunks_[p.row].chunk_id, p.tf);
    }
    std::sort(entries.begin(), entries.end());
    json line = {{"term", term}, {"entries", json::array()}};
    for (const auto &[id, tf] : entries) {
      line["entries"].push_back({id, tf});
    }
    postings_data += line.dump();
    postings_data += '\n';
  }

  write_all(dir / kChunks, chunks_data);
  write_all(dir / kEmbeddings, embeddings_data);
  write_all(dir / kPostings, postings_data);

  const auto m = manifest();
  json manifest_json = {{"format_version", kFormatVersion},
                        {"dims", m.dims},
                        {"chunk_count", m.chunk_count},
                        {"bm25_params", {{"k1", m.bm25.k1}, {"b", m.bm25.b}}},
                        {"avg_doc_len", m.avg_doc_len},
                        {"created_at", m.created_at},
                        {"embedder_fingerprint", m.embedder_fingerprint},
                        {"files",
                         {{kChunks, file_entry(chunks_data)},
                          {kEmbeddings, file_entry(embeddings_data)},
                          {kPostings, file_entry(postings_data)}}}};
  // Written last: a directory without a manifest is never a valid index.
  write_all(dir / kManifest, manifest_json.dump(2) + "\n");
  return m;
}

KnowledgeIndex KnowledgeIndex::load(const fs::path &dir, std::optional<std::size_t> expected_dims) {
  if (!fs::exists(dir / kManifest)) {
    throw Error(Errc::missing_file, "missing " + std::string(kManifest) + " in " + dir.string());
  }
  json manifest;
  try {
    manifest = json::parse(read_all(dir / kManifest));
  } catch (const json::parse_error &e) {
    throw Error(Errc::checksum_mismatch, std::string("corrupt manifest: ") + e.what());
  }

  try {
    const auto dims = manifest.at("dims").get<std::size_t>();
    if (expected_dims && *expected_dims != dims) {
      throw Error(Errc::dimension_mismatch, "index has " + std::to_string(dims) +
                                                " dims, configuration expects " +
                                                std::to_string(*expected_dims));
    }
    const auto &files = manifest.at("files");
    std::map<std::string, std::string> contents;
    for (const char *name : {kChunks, kEmbeddings, kPostings}) {
      const auto path = dir / name;
      if (!fs::exists(path)) {
        throw Error(Errc::missing_file, "missing " + std::string(name) + " in " + dir.string());
      }
      auto data = read_all(path);
      const auto &entry = files.at(name);
      if (data.size() != entry.at("bytes").get<std::size_t>() ||
          to_hex(murmur64a(data)) != entry.at("checksum").get<std::string>()) {
        throw Error(Errc::checksum_mismatch, "checksum mismatch for " + path.string());
      }
      contents.emplace(name, std::move(data));
    }

    Bm25Params bm25{manifest.at("bm25_params").at("k1").get<double>(),
                    manifest.at("bm25_params").at("b").get<double>()};
    KnowledgeIndex index(dims, manifest.at("embedder_fingerprint").get<std::string>(), bm25);
    index.created_at_ = manifest.at("created_at").get<std::string>();

    std::istringstream chunk_lines(contents[kChunks]);
    std::string line;
    while (std::getline(chunk_lines, line)) {
      if (line.empty()) {
        continue;
      }
      auto c = chunk_from_json(json::parse(line));
      const auto row = static_cast<std::uint32_t>(index.chunks_.size());
      index.row_by_id_.emplace(c.chunk_id, row);
      index.chunks_.push_back(std::move(c));
    }
    const auto rows = index.chunks_.size();
    if (rows != manifest.at("chunk_count").get<std::size_t>()) {
      throw Error(Errc::checksum_mismatch, "chunk_count does not match chunks.jsonl");
    }

    const auto &emb = contents[kEmbeddings];
    if (emb.size() != rows * dims * sizeof(float)) {
      throw Error(Errc::checksum_mismatch, "embeddings.bin size does not match chunk_count x dims");
    }
    index.vectors_.reserve(rows);
    index.norms_.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      index.vectors_.emplace_back(decode_floats(emb.data() + r * dims * sizeof(float), dims));
      index.norms_.push_back(index.vectors_.back().norm());
    }

    index.doc_len_.assign(rows, 0);
    std::istringstream posting_lines(contents[kPostings]);
    while (std::getline(posting_lines, line)) {
      if (line.empty()) {
        continue;
      }
      const auto j = json::parse(line);
      std::vector<Posting> list;
      for (const auto &e : j.at("entries")) {
        const auto row = index.row_of(e.at(0).get<std::string>());
        const auto tf = e.at(1).get<std::uint32_t>();
        list.push_back({static_cast<std::uint32_t>(row), tf});
        index.doc_len_[row] += tf;
      }
      std::sort(list.begin(), list.end(), [](const Posting &a, const Posting &b) { return a.row < b.row; });
      index.postings_.emplace(j.at("term").get<std::string>(), std::move(list));
    }
    index.recompute_avg();
    return index;
  } catch (const json::exception &e) {
    throw Error(Errc::checksum_mismatch, std::string("corrupt index data: ") + e.what());
  }
}

} // namespace coop_rag
