#include "coop_rag/corpus.hpp"

#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace coop_rag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_iso_date(const std::string &s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    return false;
  }
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') {
      return false;
    }
  }
  const int month = std::stoi(s.substr(5, 2));
  const int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void bad_line(std::size_t line, const std::string &what) {
  throw Error(Errc::parse_error, "corpus line " + std::to_string(line) + ": " + what, line);
}

Document parse_record(const json &obj, std::size_t line) {
  if (!obj.is_object()) {
    bad_line(line, "expected a JSON object");
  }
  Document doc;
  const auto id = obj.find("doc_id");
  if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
    bad_line(line, "missing or empty \"doc_id\"");
  }
  doc.doc_id = id->get<std::string>();

  const auto body = obj.find("body");
  if (body == obj.end() || !body->is_string()) {
    bad_line(line, "missing \"body\" string");
  }
  doc.body = normalize_newlines(body->get<std::string>());

  for (const char *key : {"title", "source"}) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      continue;
    }
    if (!it->is_string()) {
      bad_line(line, std::string("\"") + key + "\" must be a string");
    }
    (std::string_view(key) == "title" ? doc.title : doc.source) = it->get<std::string>();
  }

  if (const auto it = obj.find("publication_date"); it != obj.end() && !it->is_null()) {
    if (!it->is_string() || !is_iso_date(it->get<std::string>())) {
      bad_line(line, "\"publication_date\" must be YYYY-MM-DD or null");
    }
    doc.publication_date = it->get<std::string>();
  }

  if (const auto it = obj.find("topics"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) {
      bad_line(line, "\"topics\" must be an array of strings");
    }
    for (const auto &topic : *it) {
      if (!topic.is_string()) {
        bad_line(line, "\"topics\" must be an array of strings");
      }
      doc.topics.push_back(topic.get<std::string>());
    }
  }

  if (const auto it = obj.find("relevance_score"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) {
      bad_line(line, "\"relevance_score\" must be a number");
    }
    doc.relevance_score = it->get<double>();
  }
  return doc;
}

void sort_and_check_unique(std::vector<Document> &docs) {
  std::sort(docs.begin(), docs.end(),
            [](const Document &a, const Document &b) { return a.doc_id < b.doc_id; });
  const auto dup = std::adjacent_find(
      docs.begin(), docs.end(),
      [](const Document &a, const Document &b) { return a.doc_id == b.doc_id; });
  if (dup != docs.end()) {
    throw Error(Errc::duplicate_id, "duplicate doc_id: " + dup->doc_id);
  }
}

std::vector<Document> load_text_dir(const fs::path &dir) {
  std::vector<Document> docs;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    const auto ext = to_lower_ascii(entry.path().extension().string());
    if (ext != ".txt" && ext != ".md") {
      continue;
    }
    const auto content = read_file(entry.path());
    if (!utf8::is_valid(content)) {
      throw Error(Errc::parse_error, "not valid UTF-8: " + entry.path().string());
    }
    Document doc;
    doc.doc_id = entry.path().stem().string();
    doc.title = doc.doc_id;
    doc.body = normalize_newlines(content);
    docs.push_back(std::move(doc));
  }
  sort_and_check_unique(docs);
  return docs;
}

std::vector<char32_t> to_code_points(std::string_view s) {
  return utf8::decode(s).code_points;
}

bool matches_at(const std::vector<char32_t> &cps, std::size_t at, const std::vector<char32_t> &sep) {
  if (at + sep.size() > cps.size()) {
    return false;
  }
  return std::equal(sep.begin(), sep.end(), cps.begin() + static_cast<std::ptrdiff_t>(at));
}

} // namespace

void ChunkConfig::validate() const {
  if (max_chars == 0) {
    throw Error(Errc::invalid_argument, "max_chars must be positive");
  }
  if (overlap_chars >= max_chars) {
    throw Error(Errc::invalid_argument, "overlap_chars must be smaller than max_chars");
  }
  if (separators.empty() || !separators.back().empty()) {
    throw Error(Errc::invalid_argument, "separator hierarchy must end with the empty string");
  }
}

std::vector<Document> parse_corpus_jsonl(std::string_view content) {
  std::vector<Document> docs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto nl = content.find('\n', start);
    if (nl == std::string_view::npos) {
      nl = content.size();
    }
    ++line_no;
    const auto line = trim(content.substr(start, nl - start));
    start = nl + 1;
    if (line.empty()) {
      continue;
    }
    if (!utf8::is_valid(line)) {
      bad_line(line_no, "not valid UTF-8");
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      bad_line(line_no, std::string("malformed JSON: ") + e.what());
    }
    docs.push_back(parse_record(obj, line_no));
  }
  sort_and_check_unique(docs);
  return docs;
}

std::vector<Document> load_corpus(const fs::path &path, CorpusFormat format) {
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw Error(Errc::io_error, "corpus path does not exist: " + path.string());
  }
  if (format == CorpusFormat::text_dir) {
    if (!fs::is_directory(path)) {
      throw Error(Errc::io_error, "not a directory: " + path.string());
    }
    return load_text_dir(path);
  }
  if (fs::is_directory(path)) {
    throw Error(Errc::io_error, "expected a JSONL file, got a directory: " + path.string());
  }
  return parse_corpus_jsonl(read_file(path));
}

std::vector<Document> load_corpus(const fs::path &path) {
  std::error_code ec;
  const auto format = fs::is_directory(path, ec) ? CorpusFormat::text_dir : CorpusFormat::jsonl;
  return load_corpus(path, format);
}

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "#%04zu", ordinal);
  return std::string(doc_id) + buf;
}

std::vector<Chunk> split_into_chunks(const Document &doc, const ChunkConfig &cfg) {
  cfg.validate();
  const auto text = utf8::decode(doc.body);
  const auto &cps = text.code_points;
  const std::size_t n = cps.size();

  std::vector<std::vector<char32_t>> separators;
  for (const auto &sep : cfg.separators) {
    if (!sep.empty()) {
      separators.push_back(to_code_points(sep));
    }
  }

  const auto is_ws = [&](std::size_t i) { return utf8::is_space(cps[i]); };

  std::vector<Chunk> chunks;
  std::size_t pos = 0;
  while (pos < n) {
    while (pos < n && is_ws(pos)) {
      ++pos;
    }
    if (pos == n) {
      break;
    }

    const std::size_t limit = pos + cfg.max_chars;
    std::size_t end = n;
    if (limit < n) {
      end = limit; // character-level fallback
      for (const auto &sep : separators) {
        if (sep.size() > cfg.max_chars) {
          continue;
        }
        bool found = false;
        for (std::size_t j = limit - sep.size(); j > pos; --j) {
          if (matches_at(cps, j, sep)) {
            end = j + sep.size();
            found = true;
            break;
          }
        }
        if (found) {
          break;
        }
      }
    }

    std::size_t trimmed_end = end;
    while (trimmed_end > pos && is_ws(trimmed_end - 1)) {
      --trimmed_end;
    }
    Chunk chunk;
    chunk.doc_id = doc.doc_id;
    chunk.ordinal = chunks.size();
    chunk.chunk_id = make_chunk_id(doc.doc_id, chunk.ordinal);
    chunk.span = {pos, trimmed_end};
    chunk.text = doc.body.substr(text.offsets[pos], text.offsets[trimmed_end] - text.offsets[pos]);
    chunks.push_back(attach_metadata(std::move(chunk), doc));

    if (end >= n) {
      break;
    }

    // Next chunk starts overlap_chars back, snapped forward to the first
    // word start inside the overlap window when there is one.
    const std::size_t overlap_start = end >= cfg.overlap_chars ? end - cfg.overlap_chars : 0;
    const std::size_t window_start = std::max(overlap_start, pos + 1);
    std::size_t next = end;
    bool window_has_space = false;
    for (std::size_t p = window_start; p < end; ++p) {
      if (is_ws(p)) {
        window_has_space = true;
      } else if (is_ws(p - 1)) {
        next = p;
        break;
      }
    }
    if (next == end && !window_has_space && overlap_start > pos) {
      next = overlap_start;
    }
    pos = next;
  }
  return chunks;
}

Chunk attach_metadata(Chunk chunk, const Document &doc) {
  if (chunk.doc_id != doc.doc_id) {
    throw Error(Errc::invalid_argument,
                "chunk " + chunk.chunk_id + " does not belong to document " + doc.doc_id);
  }
  chunk.metadata.title = doc.title;
  chunk.metadata.source = doc.source;
  chunk.metadata.publication_date = doc.publication_date;
  chunk.metadata.topics = doc.topics;
  chunk.metadata.relevance_score = doc.relevance_score;
  return chunk;
}

std::vector<Chunk> chunk_documents(const std::vector<Document> &docs, const ChunkConfig &cfg) {
  std::vector<Chunk> all;
  for (const auto &doc : docs) {
    auto chunks = split_into_chunks(doc, cfg);
    all.insert(all.end(), std::make_move_iterator(chunks.begin()),
               std::make_move_iterator(chunks.end()));
  }
  return all;
}

} // namespace coop_rag
