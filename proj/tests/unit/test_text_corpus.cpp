#include "coop_rag/corpus.hpp"
#include "coop_rag/error.hpp"
#include "coop_rag/text.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace coop_rag;
using testutil::TempDir;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("How much water do broilers drink?") ==
        std::vector<std::string>{"how", "much", "water", "do", "broilers", "drink"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("HPAI-positive") == std::vector<std::string>{"hpai", "positive"});
  CHECK(tokenize("  NH3 at 25ppm ") == std::vector<std::string>{"nh3", "at", "25ppm"});
}

TEST_CASE("split_sentences keeps terminators") {
  CHECK(split_sentences("One. Two! Three? Four") == std::vector<std::string>{"One.", "Two!", "Three?", "Four"});
  CHECK(split_sentences("3.5 kg birds. Next") == std::vector<std::string>{"3.5 kg birds.", "Next"});
  CHECK(split_sentences("   ").empty());
}

TEST_CASE("normalize_newlines converts CRLF and CR") {
  CHECK(normalize_newlines("a\r\nb\rc\n") == "a\nb\nc\n");
}

TEST_CASE("utf8 decode reports code points and byte offsets") {
  const auto d = utf8::decode("a\xC3\xA9z");
  REQUIRE(d.size() == 3);
  CHECK(d.code_points[1] == U'é');
  CHECK(d.offsets == std::vector<std::size_t>{0, 1, 3, 4});
  CHECK_FALSE(utf8::is_valid("\xFF"));
}

TEST_CASE("load_corpus JSONL") {
  TempDir dir;
  SECTION("three valid records sorted by doc_id") {
    testutil::write_file(dir / "c.jsonl",
                         R"({"doc_id":"b","title":"B","source":"S","publication_date":"2020-01-01","topics":["x"],"body":"bee"})"
                         "\n"
                         R"({"doc_id":"a","title":"A","source":"S","publication_date":null,"topics":[],"body":"ay\r\nline"})"
                         "\n\n"
                         R"({"doc_id":"c","body":"sea"})"
                         "\n");
    const auto docs = load_corpus(dir / "c.jsonl");
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].doc_id == "a");
    CHECK(docs[0].body == "ay\nline");
    CHECK_FALSE(docs[0].publication_date.has_value());
    CHECK(docs[1].publication_date == "2020-01-01");
    CHECK(docs[2].title.empty());
  }
  SECTION("duplicate doc_id names the id") {
    testutil::write_file(dir / "d.jsonl", R"({"doc_id":"dup","body":"x"})"
                                          "\n"
                                          R"({"doc_id":"dup","body":"y"})"
                                          "\n");
    try {
      load_corpus(dir / "d.jsonl");
      FAIL("expected duplicate_id");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::duplicate_id);
      CHECK(std::string(e.what()).find("dup") != std::string::npos);
    }
  }
  SECTION("malformed line reports its line number") {
    testutil::write_file(dir / "m.jsonl", R"({"doc_id":"a","body":"x"})"
                                          "\n{not json\n");
    try {
      load_corpus(dir / "m.jsonl");
      FAIL("expected parse_error");
    } catch (const Error &e) {
      CHECK(e.code() == Errc::parse_error);
      CHECK(e.position() == std::optional<std::size_t>(2));
    }
  }
  SECTION("bad date rejected") {
    testutil::write_file(dir / "x.jsonl", R"({"doc_id":"a","body":"x","publication_date":"May 2020"})");
    CHECK_THROWS_AS(load_corpus(dir / "x.jsonl"), Error);
  }
  SECTION("missing path is an I/O error") {
    try {
      load_corpus(dir / "nope.jsonl");
      FAIL("expected io_error");
    } catch (const Error &e) {
      CHECK(e.category() == ErrorCategory::io);
    }
  }
}

TEST_CASE("load_corpus text directory") {
  TempDir dir;
  SECTION("empty directory gives no documents") {
    CHECK(load_corpus(dir.path(), CorpusFormat::text_dir).empty());
  }
  SECTION("txt and md files become documents keyed by stem") {
    testutil::write_file(dir / "zeta.md", "# Zeta\nbody");
    testutil::write_file(dir / "alpha.txt", "alpha body");
    testutil::write_file(dir / "skip.pdf", "binary");
    const auto docs = load_corpus(dir.path());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "alpha");
    CHECK(docs[1].doc_id == "zeta");
    CHECK(docs[0].body == "alpha body");
  }
}

TEST_CASE("ChunkConfig defaults and validation") {
  ChunkConfig cfg;
  CHECK(cfg.max_chars == 800);
  CHECK(cfg.overlap_chars == 80);
  CHECK(cfg.separators == std::vector<std::string>{"\n\n", "\n", ". ", " ", ""});
  ChunkConfig bad = cfg;
  bad.overlap_chars = 800;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.separators = {"\n"};
  CHECK_THROWS_AS(bad.validate(), Error);
}

namespace {

Document doc_with(std::string body) {
  Document d;
  d.doc_id = "doc";
  d.title = "T";
  d.source = "S";
  d.topics = {"nutrition"};
  d.body = std::move(body);
  return d;
}

} // namespace

TEST_CASE("split_into_chunks fixed-window examples") {
  const ChunkConfig cfg;
  SECTION("exactly 800 characters") {
    const auto chunks = split_into_chunks(doc_with(std::string(800, 'a')), cfg);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].span == CharSpan{0, 800});
  }
  SECTION("880 characters") {
    const auto chunks = split_into_chunks(doc_with(std::string(880, 'a')), cfg);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].span == CharSpan{0, 800});
    CHECK(chunks[1].span == CharSpan{720, 880});
    CHECK(chunks[1].chunk_id == "doc#0001");
  }
  SECTION("empty and whitespace-only bodies") {
    CHECK(split_into_chunks(doc_with(""), cfg).empty());
    CHECK(split_into_chunks(doc_with(" \n\n \t"), cfg).empty());
  }
}

TEST_CASE("split_into_chunks prefers paragraph breaks") {
  const std::string p1(500, 'x');
  const std::string p2(500, 'y');
  const auto chunks = split_into_chunks(doc_with(p1 + "\n\n" + p2), {});
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].text == p1);
  CHECK(chunks[1].text.find('y') != std::string::npos);
}

TEST_CASE("split_into_chunks counts code points, never splitting one") {
  std::string body;
  for (int i = 0; i < 900; ++i) {
    body += "\xC3\xA9"; // é
  }
  const auto chunks = split_into_chunks(doc_with(body), {});
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].span == CharSpan{0, 800});
  CHECK(chunks[0].text.size() == 1600);
  CHECK(utf8::is_valid(chunks[1].text));
}

TEST_CASE("attach_metadata") {
  auto d = doc_with("body text");
  const auto chunks = split_into_chunks(d, {});
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].metadata.topics == std::vector<std::string>{"nutrition"});
  CHECK_FALSE(chunks[0].metadata.publication_date.has_value());
  Chunk other = chunks[0];
  other.doc_id = "different";
  CHECK_THROWS_AS(attach_metadata(other, d), Error);
}

TEST_CASE("chunker properties over random documents") {
  std::mt19937_64 rng(1234);
  const std::vector<std::string> pieces{"\n\n", "\n", ". ", " ", "  "};
  const ChunkConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> len_dist(0, 10000);
    const int target = len_dist(rng);
    std::string body;
    while (static_cast<int>(body.size()) < target) {
      std::uniform_int_distribution<int> word(1, 14);
      const int w = word(rng);
      for (int i = 0; i < w; ++i) {
        body.push_back(static_cast<char>('a' + rng() % 26));
      }
      body += pieces[rng() % pieces.size()];
    }
    const auto d = doc_with(body);
    const auto chunks = split_into_chunks(d, cfg);
    std::vector<bool> covered(body.size(), false);
    std::size_t prev_start = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto &c = chunks[i];
      REQUIRE(c.text.size() > 0);
      REQUIRE(c.span.length() <= cfg.max_chars);
      REQUIRE(c.ordinal == i);
      REQUIRE(c.span.start >= prev_start);
      REQUIRE(c.text == body.substr(c.span.start, c.span.length()));
      prev_start = c.span.start;
      for (auto p = c.span.start; p < c.span.end; ++p) {
        covered[p] = true;
      }
    }
    for (std::size_t p = 0; p < body.size(); ++p) {
      if (!std::isspace(static_cast<unsigned char>(body[p]))) {
        REQUIRE(covered[p]);
      }
    }
    REQUIRE(split_into_chunks(d, cfg) == chunks);
  }
}

TEST_CASE("separator-free bodies match the fixed-window oracle") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng() % 5000;
    std::string body(n, 'q');
    for (auto &ch : body) {
      ch = static_cast<char>('a' + rng() % 26);
    }
    const auto chunks = split_into_chunks(doc_with(body), {});
    const auto expected = oracle::fixed_windows(n, 800, 80);
    REQUIRE(chunks.size() == expected.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      CHECK(chunks[i].span.start == expected[i].first);
      CHECK(chunks[i].span.end == expected[i].second);
    }
  }
}

TEST_CASE("word overlap between sentence-free chunks") {
  // Words separated by single spaces: the next chunk restarts inside the
  // previous one's last 80 characters, at a word start.
  std::string body;
  for (int i = 0; i < 300; ++i) {
    body += "word" + std::to_string(i) + " ";
  }
  const auto chunks = split_into_chunks(doc_with(body), {});
  REQUIRE(chunks.size() >= 2);
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    const auto &prev = chunks[i - 1].span;
    const auto &cur = chunks[i].span;
    CHECK(cur.start < prev.end);
    CHECK(prev.end - cur.start <= 80);
    CHECK(body[cur.start - 1] == ' ');
  }
}
