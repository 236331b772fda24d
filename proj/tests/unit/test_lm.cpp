#include <atomic>
#include <thread>

#include <httplib.h>

#include "doctest.h"
#include "psim/lm/backends.hpp"
#include "psim/lm/client.hpp"
#include "support.hpp"

using namespace psim;
using namespace psim::lm;

namespace {

PromptRequest summary_request(const std::string& state) {
  PromptRequest r;
  r.kind = PromptKind::EmotionUpdate;
  r.context = {{"character", state}, {"action", "reading  in the library"}, {"previous", 4}};
  return r;
}

// Local chat-completions endpoint answering from a script of (status, content).
struct MockServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::vector<std::pair<int, std::string>> script;
  std::atomic<std::size_t> hits{0};
  json last_body;

  MockServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = json::parse(req.body);
      std::size_t i = hits++;
      auto [status, content] = script.at(std::min(i, script.size() - 1));
      res.status = status;
      json doc = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
      res.set_content(doc.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockServer() {
    server.stop();
    thread.join();
  }
  HttpBackendConfig config() const {
    HttpBackendConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port);
    c.model = "mock-model";
    c.timeout_seconds = 5;
    c.retries = 2;
    return c;
  }
};

}  // namespace

TEST_SUITE("lm") {
  TEST_CASE("kind names round trip") {
    for (std::size_t i = 0; i < kPromptKindCount; ++i) {
      auto k = static_cast<PromptKind>(i);
      CHECK(parse_kind(kind_name(k)) == k);
      CHECK_FALSE(required_fields(k).empty());
    }
    CHECK(kind_name(PromptKind::GrowthPreference) == "GROWTH_PREFERENCE");
    CHECK_FALSE(parse_kind("PLAN_WEEK"));
  }

  TEST_CASE("request identity ignores key order and whitespace runs") {
    auto a = summary_request("calm");
    PromptRequest b;
    b.kind = PromptKind::EmotionUpdate;
    b.context = json::parse(R"({"previous":4,"action":"reading in the library ","character":"calm"})");
    CHECK(a.hash() == b.hash());
    b.kind = PromptKind::ActionDescribe;
    CHECK(a.hash() != b.hash());
  }

  TEST_CASE("schema checks") {
    CHECK_FALSE(schema_violation(PromptKind::EmotionUpdate, {{"category", 3}, {"feeling", "ok"}}));
    CHECK(schema_violation(PromptKind::EmotionUpdate, {{"category", "3"}, {"feeling", "ok"}}));
    CHECK(schema_violation(PromptKind::EmotionUpdate, {{"feeling", "ok"}}));
    CHECK_FALSE(schema_violation(PromptKind::InviteDecide, {{"accept", true}, {"reason", "x"}, {"benefit_new", 0.5}}));
    CHECK(schema_violation(PromptKind::DialogTurn, json::array()));
  }

  TEST_CASE("client enforces preconditions") {
    auto stub = std::make_shared<test::StubBackend>();
    LmClient client(stub);
    PromptRequest r = summary_request("calm");
    r.context.erase("previous");
    CHECK_THROWS_AS(client.complete(r), RequestError);
    r.context = json::array();
    CHECK_THROWS_AS(client.complete(r), RequestError);
    CHECK(stub->requests.empty());
    CHECK_THROWS_AS(LmClient(nullptr), std::invalid_argument);
  }

  TEST_CASE("client repairs once then fails") {
    auto stub = std::make_shared<test::StubBackend>();
    stub->push(PromptKind::EmotionUpdate, {{"category", "five"}});
    stub->push(PromptKind::EmotionUpdate, {{"category", 5}, {"feeling", "glad"}});
    LmClient client(stub);
    std::vector<json> seen;
    client.set_observer([&](const PromptRequest&, const CompletionResponse& r) { seen.push_back(r.payload); });
    auto resp = client.complete(summary_request("calm"));
    CHECK(resp.payload.at("category") == 5);
    CHECK(resp.backend_id == "stub");
    REQUIRE(stub->requests.size() == 2);
    CHECK(stub->requests[1].context.contains("repair"));
    CHECK(seen.size() == 2);

    stub->push(PromptKind::EmotionUpdate, json::object());
    stub->push(PromptKind::EmotionUpdate, json::object());
    CHECK_THROWS_AS(client.complete(summary_request("calm")), DecodeError);

    stub->fail(PromptKind::EmotionUpdate);
    CHECK_THROWS_AS(client.complete(summary_request("calm")), BackendError);
  }

  TEST_CASE("scripted backend is a pure function of request and seed") {
    ScriptedBackend a(11), b(11);
    auto r = summary_request("A cheerful and outgoing student.");
    CHECK(a.generate(r) == b.generate(r));
    CHECK(a.generate(r) == a.generate(r));
    LmClient client(std::make_shared<ScriptedBackend>(11));
    CHECK_FALSE(schema_violation(r.kind, client.complete(r).payload));
  }

  TEST_CASE("replay backend serves recorded responses per identity in order") {
    auto r1 = summary_request("one");
    auto r2 = summary_request("two");
    std::vector<json> ex = {
        {{"kind", "EMOTION_UPDATE"}, {"context", r1.context}, {"response", {{"n", 1}}}, {"backend", "scripted"}},
        {{"kind", "EMOTION_UPDATE"}, {"context", r2.context}, {"response", {{"n", 2}}}, {"backend", "scripted"}},
        {{"kind", "EMOTION_UPDATE"}, {"context", r1.context}, {"response", {{"n", 3}}}, {"backend", "scripted"}},
    };
    ReplayBackend replay(ex);
    CHECK(replay.id() == "scripted");
    CHECK(replay.remaining() == 3);
    CHECK(replay.generate(r1).at("n") == 1);
    CHECK(replay.generate(r1).at("n") == 3);
    CHECK(replay.generate(r2).at("n") == 2);
    CHECK(replay.remaining() == 0);
    CHECK_THROWS_AS(replay.generate(r1), BackendError);
    std::vector<json> bad = {{{"kind", "NOPE"}, {"context", json::object()}, {"response", json::object()}}};
    CHECK_THROWS_AS(ReplayBackend{bad}, InputError);
  }

  TEST_CASE("http backend retries server errors") {
    MockServer mock;
    mock.script = {{503, ""}, {200, R"({"category": 6, "feeling": "bright"})"}};
    auto backend = std::make_shared<HttpBackend>(mock.config());
    LmClient client(backend);
    auto resp = client.complete(summary_request("calm"));
    CHECK(resp.payload.at("category") == 6);
    CHECK(mock.hits == 2);
    CHECK(resp.backend_id == "http:mock-model");
    CHECK(mock.last_body.at("model") == "mock-model");
    CHECK(mock.last_body.at("messages").size() == 2);
    CHECK(mock.last_body.at("messages")[1].at("content") == summary_request("calm").canonical_context());
  }

  TEST_CASE("http backend errors") {
    MockServer mock;
    mock.script = {{400, "bad"}};
    HttpBackend backend(mock.config());
    CHECK_THROWS_AS(backend.generate(summary_request("calm")), BackendError);
    CHECK(mock.hits == 1);

    MockServer down;
    down.script = {{500, ""}};
    HttpBackend flaky(down.config());
    CHECK_THROWS_AS(flaky.generate(summary_request("calm")), BackendError);
    CHECK(down.hits == 3);

    MockServer prose;
    prose.script = {{200, "I feel fine"}, {200, R"({"category": 2, "feeling": "low"})"}};
    LmClient client(std::make_shared<HttpBackend>(prose.config()));
    auto resp = client.complete(summary_request("calm"));
    CHECK(resp.payload.at("category") == 2);
    CHECK(prose.hits == 2);

    HttpBackendConfig empty;
    CHECK_THROWS_AS(HttpBackend{empty}, InputError);
  }
}
