#include "coop_rag/base64.hpp"
#include "coop_rag/error.hpp"
#include "coop_rag/service.hpp"

#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <algorithm>

using namespace coop_rag;
using nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

ServiceConfig config_in(const testutil::TempDir &dir) {
  ServiceConfig cfg;
  cfg.data_dir = dir.path();
  cfg.port = 0;
  cfg.threads = 2;
  return cfg;
}

void save_fixture_index(const ServiceConfig &cfg) {
  const HashEmbedder e(cfg.embedder.dims);
  testutil::fixture_index(e).save(cfg.resolved_index_dir());
}

ApiRequest post(const std::string &path, const json &body) { return {"POST", path, {}, body.dump(), std::nullopt}; }
ApiRequest get(const std::string &path) { return {"GET", path, {}, "", std::nullopt}; }

json body_of(const ApiResponse &r) { return json::parse(r.body); }

std::string error_code(const ApiResponse &r) {
  const auto b = body_of(r);
  REQUIRE(b.contains("error"));
  CHECK(b["error"]["message"].is_string());
  const auto code = b["error"]["code"].get<std::string>();
  CHECK(std::find(std::begin(kApiErrorCodes), std::end(kApiErrorCodes), code) != std::end(kApiErrorCodes));
  return code;
}

std::string header(const ApiResponse &r, const std::string &name) {
  for (const auto &[k, v] : r.headers) {
    if (k == name) {
      return v;
    }
  }
  return {};
}

std::string jsonl_docs(int first, int count) {
  std::string out;
  for (int i = first; i < first + count; ++i) {
    out += json{{"doc_id", "doc" + std::to_string(i)},
                {"title", "Note " + std::to_string(i)},
                {"source", "Bulletin " + std::to_string(i)},
                {"body", "Broiler note " + std::to_string(i) + " about litter moisture and ventilation."}}
               .dump() +
           "\n";
  }
  return out;
}

} // namespace

TEST_CASE("health with stub backends") {
  testutil::TempDir dir;
  Service svc(config_in(dir));
  const auto r = svc.handle(get("/v1/health"));
  CHECK(r.status == 200);
  const auto b = body_of(r);
  CHECK(b["status"] == "ok");
  CHECK(b["index_chunks"] == 0);
  CHECK(b["backends"] == json{{"embedding", "stub"}, {"generation", "stub"}, {"vision", "stub"}});
}

TEST_CASE("chat endpoint") {
  testutil::TempDir dir;
  const auto cfg = config_in(dir);
  save_fixture_index(cfg);
  Service svc(cfg);
  const auto truth = testutil::fixture_truth();

  SECTION("first message creates a session") {
    const auto r = svc.handle(post("/v1/chat", {{"message", truth[0].question}}));
    REQUIRE(r.status == 200);
    const auto b = body_of(r);
    CHECK(b["session_id"].is_string());
    CHECK(b["turn_index"] == 0);
    CHECK(b["ood"] == false);
    CHECK(b["contexts"].size() == 6);
    CHECK(b["citations"].size() >= 1);
    CHECK(b["latency_ms"].is_number_integer());
    for (const auto &c : b["contexts"]) {
      CHECK(c.contains("chunk_id"));
      CHECK(c.contains("source"));
      CHECK(c["score"].is_number());
    }
    const auto follow = svc.handle(post("/v1/chat", {{"session_id", b["session_id"]}, {"message", "Why is that?"}}));
    CHECK(body_of(follow)["turn_index"] == 1);
  }
  SECTION("empty message") {
    const auto r = svc.handle(post("/v1/chat", {{"message", "   "}}));
    CHECK(r.status == 400);
    CHECK(error_code(r) == "input_required");
  }
  SECTION("unknown session") {
    const auto r = svc.handle(post("/v1/chat", {{"session_id", "nope"}, {"message", "broiler feed?"}}));
    CHECK(r.status == 404);
    CHECK(error_code(r) == "unknown_session");
  }
  SECTION("out of domain") {
    const auto r = svc.handle(post("/v1/chat", {{"message", "Explain quantum chromodynamics gauge symmetry"}}));
    REQUIRE(r.status == 200);
    const auto b = body_of(r);
    CHECK(b["ood"] == true);
    CHECK(b["answer"] == std::string(kDefaultClarification));
  }
  SECTION("malformed bodies") {
    CHECK(svc.handle({"POST", "/v1/chat", {}, "{not json", std::nullopt}).status == 400);
    const auto r = svc.handle(post("/v1/chat", {{"message", 5}}));
    CHECK(r.status == 400);
    CHECK(error_code(r) == "malformed_request");
    CHECK(svc.handle(post("/v1/chat", {{"message", "hi"}, {"style", "loud"}})).status == 400);
    CHECK(svc.handle(post("/v1/chat", {{"message", "hi"}, {"image_base64", "!!!"}})).status == 400);
  }
  SECTION("image with stub caption") {
    const std::string png = std::string("\x89PNG\r\n\x1a\n", 8) + "pixels";
    const auto r = svc.handle(post("/v1/chat", {{"message", "What is wrong with my hen?"},
                                                {"image_base64", base64::encode(png)}}));
    REQUIRE(r.status == 200);
    CHECK(body_of(r)["image_caption"] == VisionSpec{}.default_caption);
  }
  SECTION("unknown route") {
    const auto r = svc.handle(get("/v1/nothing"));
    CHECK(r.status == 404);
    CHECK(error_code(r) == "not_found");
  }
}

TEST_CASE("chat with no index loaded") {
  testutil::TempDir dir;
  Service svc(config_in(dir));
  const auto r = svc.handle(post("/v1/chat", {{"message", "broiler water?"}}));
  CHECK(r.status == 503);
  CHECK(error_code(r) == "index_not_loaded");
}

TEST_CASE("generation backend failure maps to 502") {
  testutil::TempDir dir;
  const auto cfg = config_in(dir);
  save_fixture_index(cfg);
  ServiceBackends backends;
  backends.generator = std::make_unique<testutil::FailingGenerator>();
  Service svc(cfg, std::move(backends));
  const auto r = svc.handle(post("/v1/chat", {{"message", "broiler water intake?"}}));
  CHECK(r.status == 502);
  CHECK(error_code(r) == "backend_failure");
  CHECK(body_of(svc.handle(get("/v1/health")))["backends"]["generation"] == "down");
}

TEST_CASE("payload limits") {
  testutil::TempDir dir;
  auto cfg = config_in(dir);
  cfg.max_body_bytes = 1000;
  cfg.max_image_base64_bytes = 100;
  save_fixture_index(cfg);
  Service svc(cfg);
  const auto big = svc.handle(post("/v1/chat", {{"message", std::string(2000, 'a')}}));
  CHECK(big.status == 413);
  CHECK(error_code(big) == "payload_too_large");
  const auto img = svc.handle(post("/v1/chat", {{"message", "x"}, {"image_base64", std::string(200, 'A')}}));
  CHECK(img.status == 413);
}

TEST_CASE("feedback and metrics") {
  testutil::TempDir dir;
  const auto cfg = config_in(dir);
  save_fixture_index(cfg);
  const auto clock = std::make_shared<FrozenClock>(parse_utc("2024-05-01T12:00:00.000Z"));
  std::string sid;
  {
    Service svc(cfg, {}, clock);
    const auto fresh = body_of(svc.handle(get("/v1/metrics")));
    CHECK(fresh["queries_total"] == 0);
    CHECK(fresh["daily_counts"].empty());
    CHECK(fresh["feedback_histogram"] == json{{"0", 0}, {"25", 0}, {"50", 0}, {"75", 0}, {"100", 0}});

    for (int i = 0; i < 3; ++i) {
      const auto r = svc.handle(post("/v1/chat", {{"message", "broiler water intake " + std::to_string(i)}}));
      REQUIRE(r.status == 200);
      sid = body_of(r)["session_id"];
    }
    CHECK(svc.handle(post("/v1/feedback", {{"session_id", sid}, {"turn_index", 0}, {"accuracy_pct", 100}})).status ==
          200);
    const auto bad = svc.handle(post("/v1/feedback", {{"session_id", sid}, {"turn_index", 0}, {"accuracy_pct", 60}}));
    CHECK(bad.status == 400);
    CHECK(error_code(bad) == "invalid_feedback");
    const auto fractional =
        svc.handle(post("/v1/feedback", {{"session_id", sid}, {"turn_index", 0}, {"accuracy_pct", 75.5}}));
    CHECK(fractional.status == 400);
    const auto turn = svc.handle(post("/v1/feedback", {{"session_id", sid}, {"turn_index", 3}, {"accuracy_pct", 75}}));
    CHECK(turn.status == 404);
    CHECK(error_code(turn) == "unknown_turn");
    const auto sess = svc.handle(post("/v1/feedback", {{"session_id", "x"}, {"turn_index", 0}, {"accuracy_pct", 75}}));
    CHECK(error_code(sess) == "unknown_session");

    const auto m = body_of(svc.handle(get("/v1/metrics")));
    CHECK(m["queries_total"] == 3);
    CHECK(m["ood_total"] == 0);
    CHECK(m["feedback_histogram"]["100"] == 1);
    CHECK(m["feedback_histogram"]["75"] == 0);
    REQUIRE(m["daily_counts"].size() == 1);
    CHECK(m["daily_counts"][0]["date"] == "2024-05-01");
    CHECK(m["daily_counts"][0]["queries"] == 3);
    CHECK(m["daily_counts"][0]["mean_accuracy_pct"] == 100.0);
    CHECK(m["mean_contexts"] == 6.0);
  }
  // Logs are replayed on restart, sessions included.
  Service again(cfg, {}, clock);
  const auto m = body_of(again.handle(get("/v1/metrics")));
  CHECK(m["queries_total"] == 3);
  CHECK(m["feedback_histogram"]["100"] == 1);
  CHECK(again.handle(post("/v1/feedback", {{"session_id", sid}, {"turn_index", 0}, {"accuracy_pct", 25}})).status ==
        200);
}

TEST_CASE("ingest and mean contexts 6, 6, 5") {
  testutil::TempDir dir;
  auto cfg = config_in(dir);
  SECTION("disabled") {
    Service svc(cfg);
    const auto r = svc.handle(post("/v1/ingest", {{"corpus_path", "x"}}));
    CHECK(r.status == 403);
    CHECK(error_code(r) == "ingestion_disabled");
  }
  SECTION("enabled") {
    cfg.ingestion_enabled = true;
    Service svc(cfg);
    testutil::write_file(dir / "five.jsonl", jsonl_docs(0, 5));
    const auto r = svc.handle(post("/v1/ingest", {{"corpus_path", (dir / "five.jsonl").string()}}));
    REQUIRE(r.status == 200);
    CHECK(body_of(r) == json{{"documents", 5}, {"chunks", 5}});
    CHECK(std::filesystem::exists(cfg.resolved_index_dir() / "manifest.json"));
    CHECK(body_of(svc.handle(post("/v1/chat", {{"message", "broiler litter moisture?"}})))["contexts"].size() == 5);

    ApiRequest upload{"POST", "/v1/ingest", {}, "", jsonl_docs(5, 3)};
    const auto up = svc.handle(upload);
    REQUIRE(up.status == 200);
    CHECK(body_of(up)["documents"] == 3);
    CHECK(svc.index()->size() == 8);
    for (int i = 0; i < 2; ++i) {
      CHECK(body_of(svc.handle(post("/v1/chat", {{"message", "broiler ventilation?"}})))["contexts"].size() == 6);
    }
    const auto m = body_of(svc.handle(get("/v1/metrics")));
    CHECK_THAT(m["mean_contexts"].get<double>(), WithinAbs(17.0 / 3.0, 0.01));

    ApiRequest dup{"POST", "/v1/ingest", {}, "", jsonl_docs(0, 1) + jsonl_docs(0, 1)};
    const auto d = svc.handle(dup);
    CHECK(d.status == 422);
    CHECK(error_code(d) == "malformed_corpus");
    CHECK(body_of(d)["error"]["message"].get<std::string>().find("doc0") != std::string::npos);
    CHECK(svc.handle(post("/v1/ingest", {{"corpus_path", (dir / "missing.jsonl").string()}})).status == 400);
  }
}

TEST_CASE("CORS headers and preflight") {
  testutil::TempDir dir;
  auto cfg = config_in(dir);
  SECTION("wildcard") {
    Service svc(cfg);
    const auto r = svc.handle({"OPTIONS", "/v1/chat", {{"origin", "http://localhost:5173"}}, "", std::nullopt});
    CHECK(r.status == 204);
    CHECK(header(r, "Access-Control-Allow-Origin") == "*");
    CHECK(header(r, "Access-Control-Allow-Methods").find("POST") != std::string::npos);
    CHECK(header(svc.handle(get("/v1/health")), "Access-Control-Allow-Origin") == "*");
  }
  SECTION("explicit origin list") {
    cfg.cors_origins = {"http://ui.example"};
    Service svc(cfg);
    const auto ok = svc.handle({"GET", "/v1/health", {{"origin", "http://ui.example"}}, "", std::nullopt});
    CHECK(header(ok, "Access-Control-Allow-Origin") == "http://ui.example");
    CHECK(header(ok, "Vary") == "Origin");
    const auto other = svc.handle({"GET", "/v1/health", {{"origin", "http://evil.example"}}, "", std::nullopt});
    CHECK(header(other, "Access-Control-Allow-Origin").empty());
  }
}

TEST_CASE("bearer token auth") {
  testutil::TempDir dir;
  auto cfg = config_in(dir);
  cfg.auth_token_env = "COOP_RAG_TEST_TOKEN";
  SECTION("missing variable is a config error") {
    ::unsetenv("COOP_RAG_TEST_TOKEN");
    CHECK_THROWS_AS(Service(cfg), Error);
  }
  SECTION("token enforced except on health") {
    testutil::ScopedEnv env("COOP_RAG_TEST_TOKEN", "s3cret");
    Service svc(cfg);
    CHECK(svc.handle(get("/v1/health")).status == 200);
    const auto denied = svc.handle(get("/v1/metrics"));
    CHECK(denied.status == 401);
    CHECK(error_code(denied) == "unauthorized");
    CHECK(svc.handle({"GET", "/v1/metrics", {{"authorization", "Bearer s3cret"}}, "", std::nullopt}).status == 200);
    CHECK(svc.handle({"GET", "/v1/metrics", {{"authorization", "Bearer nope"}}, "", std::nullopt}).status == 401);
  }
}

TEST_CASE("distinct sessions are order independent") {
  testutil::TempDir dir;
  const auto cfg = config_in(dir);
  save_fixture_index(cfg);
  auto transcript = [&](bool interleave) {
    Service svc(cfg, {}, std::make_shared<FrozenClock>());
    const std::vector<std::string> a{"broiler water intake?", "and in hot weather?"};
    const std::vector<std::string> b{"layer lighting program?", "what about pullets?"};
    std::string sa, sb;
    std::vector<std::string> answers_a, answers_b;
    auto say = [&](std::string &sid, const std::string &msg, std::vector<std::string> &out) {
      json req{{"message", msg}};
      if (!sid.empty()) {
        req["session_id"] = sid;
      }
      const auto r = body_of(svc.handle(post("/v1/chat", req)));
      sid = r["session_id"];
      out.push_back(r["answer"]);
    };
    if (interleave) {
      say(sa, a[0], answers_a);
      say(sb, b[0], answers_b);
      say(sb, b[1], answers_b);
      say(sa, a[1], answers_a);
    } else {
      say(sa, a[0], answers_a);
      say(sa, a[1], answers_a);
      say(sb, b[0], answers_b);
      say(sb, b[1], answers_b);
    }
    answers_a.insert(answers_a.end(), answers_b.begin(), answers_b.end());
    return answers_a;
  };
  CHECK(transcript(false) == transcript(true));
}
