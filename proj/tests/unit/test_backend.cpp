#include <doctest.h>

#include <httplib.h>

#include <json.hpp>
#include <mutex>
#include <thread>

#include <algorithm>

#include "synthner/backend.hpp"
#include "synthner/error.hpp"
#include "synthner/markup.hpp"

using namespace synthner;
using namespace synthner::backend;

namespace {

sampling::SamplingParams params(std::uint64_t seed = 1) { return {0.8, 0.9, 768, seed}; }

std::string complete(MockBackend& b, std::uint64_t idx, const sampling::SamplingParams& p) {
  return b.complete(CompletionRequest{"<s>x</s>\n<s>", p, idx});
}

markup::DocumentParse parse(const std::string& completion) {
  return markup::parse_document(markup::RawSample{0, "<s>" + completion, {}});
}

// A local completion endpoint whose behaviour is set per test.
struct FakeServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::mutex mu;
  std::string last_body;
  std::string last_auth;
  int status = 200;
  std::string reply = R"({"choices":[{"text":"Hallo.</s>"}]})";

  FakeServer() {
    server.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu);
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      res.status = status;
      res.set_content(reply, "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/completions"; }
};

}  // namespace

TEST_CASE("a clean mock profile yields only well-formed sentences") {
  MockBackend b(MockProfile::german_medical());
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto d = parse(complete(b, i, params()));
    CHECK(d.diagnostics.empty());
    CHECK(d.sentences.size() == b.profile().sentences_per_sample);
    for (const auto& s : d.sentences) {
      CHECK_FALSE(s.spans.empty());
      for (const auto& sp : s.spans) {
        CHECK((sp.label.name() == "Medikation" || sp.label.name() == "Dosis" ||
               sp.label.name() == "Diagnose"));
      }
    }
  }
}

TEST_CASE("missing_close = 1 truncates every sentence") {
  auto p = MockProfile::german_medical();
  p.missing_close = 1.0;
  MockBackend b(p);
  const auto d = parse(complete(b, 0, params()));
  CHECK(d.sentences.empty());
  REQUIRE_FALSE(d.diagnostics.empty());
  for (const auto& diag : d.diagnostics) CHECK(diag.kind == markup::DiagnosticKind::MissingSentenceClose);
}

TEST_CASE("defect rates produce the matching defects") {
  SUBCASE("invalid syntax") {
    auto p = MockProfile::german_medical();
    p.invalid_syntax = 1.0;
    MockBackend b(p);
    const auto d = parse(complete(b, 0, params()));
    CHECK(d.sentences.empty());
    for (const auto& diag : d.diagnostics) {
      CHECK(diag.kind != markup::DiagnosticKind::MissingSentenceClose);
    }
  }
  SUBCASE("unknown labels") {
    auto p = MockProfile::german_medical();
    p.unknown_label = 1.0;
    MockBackend b(p);
    const auto d = parse(complete(b, 0, params()));
    REQUIRE_FALSE(d.sentences.empty());
    for (const auto& s : d.sentences) {
      CHECK(std::any_of(s.spans.begin(), s.spans.end(),
                        [](const Span& sp) { return sp.label.name() == "Symptom"; }));
    }
  }
  SUBCASE("no annotation") {
    auto p = MockProfile::german_medical();
    p.no_annotation = 1.0;
    MockBackend b(p);
    for (const auto& s : parse(complete(b, 0, params())).sentences) CHECK(s.spans.empty());
  }
  SUBCASE("duplicates") {
    auto p = MockProfile::german_medical();
    p.duplicate = 1.0;
    MockBackend b(p);
    const auto d = parse(complete(b, 0, params()));
    REQUIRE(d.sentences.size() == p.sentences_per_sample);
    for (const auto& s : d.sentences) CHECK(s.text == d.sentences[0].text);
  }
}

TEST_CASE("mock output is a pure function of seed and sample index") {
  MockBackend a(MockProfile::german_medical());
  MockBackend b(MockProfile::german_medical());
  CHECK(complete(a, 7, params(3)) == complete(b, 7, params(3)));
  CHECK(complete(a, 7, params(3)) != complete(a, 8, params(3)));
  CHECK(complete(a, 7, params(3)) != complete(a, 7, params(4)));
}

TEST_CASE("mock respects max_tokens") {
  MockBackend b(MockProfile::german_medical());
  auto p = params();
  p.max_tokens = 12;
  const auto text = complete(b, 0, p);
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  CHECK(words <= 12);
}

TEST_CASE("mock profile validation and JSON") {
  auto p = MockProfile::german_medical();
  p.duplicate = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = MockProfile::german_medical();
  p.templates = {"{Unbekannt} x"};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  const auto q = mock_profile_from_json(R"({"rates":{"duplicate":0.25},"sentences_per_sample":3})", "p");
  CHECK(q.duplicate == 0.25);
  CHECK(q.sentences_per_sample == 3);
  CHECK_THROWS_AS(mock_profile_from_json("{", "p"), DataError);
  CHECK_THROWS_AS(mock_profile_from_json(R"({"rates":{"missing_close":2}})", "p"), DataError);
}

TEST_CASE("completion request body") {
  const auto body = nlohmann::json::parse(completion_request_body("<s>", params(), "gpt-neox-20b"));
  CHECK(body["model"] == "gpt-neox-20b");
  CHECK(body["prompt"] == "<s>");
  CHECK(body["max_tokens"] == 768);
  CHECK(body["temperature"] == 0.8);
  CHECK(body["top_p"] == 0.9);
  CHECK(body["n"] == 1);
  CHECK_FALSE(nlohmann::json::parse(completion_request_body("<s>", params(), "")).contains("model"));
}

TEST_CASE("completion response parsing") {
  CHECK(completion_text_from_response(R"({"choices":[{"text":"abc"}]})") == "abc");
  for (const char* bad : {"not json", "{}", R"({"choices":[]})", R"({"choices":[{"text":1}]})"}) {
    try {
      completion_text_from_response(bad);
      FAIL("expected an error for " << bad);
    } catch (const BackendError& e) {
      CHECK(e.kind() == ErrorKind::MalformedResponse);
      CHECK_FALSE(e.fatal());
    }
  }
}

TEST_CASE("HTTP backend against a local server") {
  FakeServer srv;
  HttpBackend b(HttpBackendConfig{srv.url(), "m", "secret", std::chrono::seconds(5)});
  const CompletionRequest req{"<s>Kein Befund.</s>\n<s>", params(), 0};

  auto expect_kind = [&](ErrorKind kind) {
    try {
      b.complete(req);
      FAIL("expected a backend error");
    } catch (const BackendError& e) {
      CHECK(e.kind() == kind);
    }
  };

  SUBCASE("success") {
    CHECK(b.complete(req) == "Hallo.</s>");
    std::lock_guard lock(srv.mu);
    CHECK(srv.last_auth == "Bearer secret");
    const auto body = nlohmann::json::parse(srv.last_body);
    CHECK(body["prompt"] == "<s>Kein Befund.</s>\n<s>");
    CHECK(body["n"] == 1);
  }
  SUBCASE("401 is an authentication error") {
    srv.status = 401;
    expect_kind(ErrorKind::Authentication);
  }
  SUBCASE("429 and 503 are transport errors") {
    srv.status = 429;
    expect_kind(ErrorKind::Transport);
    srv.status = 503;
    expect_kind(ErrorKind::Transport);
  }
  SUBCASE("400 is a configuration error") {
    srv.status = 400;
    expect_kind(ErrorKind::Configuration);
  }
  SUBCASE("malformed body") {
    srv.reply = "<html>";
    expect_kind(ErrorKind::MalformedResponse);
  }
}

TEST_CASE("HTTP backend configuration errors") {
  CHECK_THROWS_AS(HttpBackend(HttpBackendConfig{"http://localhost:1/v1", "", "", std::chrono::seconds(1)}),
                  BackendError);
  CHECK_THROWS_AS(HttpBackend(HttpBackendConfig{"localhost/v1", "", "k", std::chrono::seconds(1)}),
                  BackendError);
  HttpBackend unreachable(HttpBackendConfig{"http://127.0.0.1:1/v1", "", "k", std::chrono::seconds(1)});
  try {
    unreachable.complete(CompletionRequest{"<s>", params(), 0});
    FAIL("expected a transport error");
  } catch (const BackendError& e) {
    CHECK(e.kind() == ErrorKind::Transport);
  }
}
