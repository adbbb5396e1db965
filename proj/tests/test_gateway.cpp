#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "chartattrib/chartgen/render.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/llm/cache.hpp"
#include "chartattrib/llm/gateway.hpp"
#include "chartattrib/llm/mock_backend.hpp"
#include "chartattrib/llm/schema.hpp"
#include "chartattrib/util/hash.hpp"

using namespace chartattrib;
using llm::Gateway;
using llm::MockEntry;
using llm::Prompt;
using llm::ScriptedMock;
using llm::TextPart;

namespace {

Prompt text_prompt(const std::string& text) {
  return llm::make_prompt("sys", {TextPart{text}});
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "chartattrib_gateway_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::filesystem::remove(path);
  return path;
}

std::string tiny_png() {
  return chartgen::render_chart(core::DataTable({"C"}, {"R"}, {{core::CellValue(1.0)}}),
                                core::ChartType::bar, chartgen::Layout{64, 48}, 1)
      .png;
}

}  // namespace

TEST_CASE("scripted mock returns the first match and honors one-shot order") {
  ScriptedMock mock("t", {{"RANK", "", "[2,1]", true, 0},
                          {"RANK", "", "second", true, 0}});
  Gateway gw;
  CHECK(gw.complete(mock, text_prompt("please RANK these")) == "[2,1]");
  CHECK(gw.complete(mock, text_prompt("please RANK these")) == "second");
  CHECK_THROWS_AS(gw.complete(mock, text_prompt("please RANK these")), MockMiss);
}

TEST_CASE("empty script misses") {
  ScriptedMock mock("t", {});
  Gateway gw;
  CHECK_THROWS_AS(gw.complete(mock, text_prompt("anything")), MockMiss);
}

TEST_CASE("hash matcher hits the exact rendered prompt") {
  Prompt p = text_prompt("exact content");
  std::string digest = util::sha256_hex(p.rendered());
  ScriptedMock mock("t", {{"", digest, "HIT", false, 0}});
  Gateway gw;
  CHECK(gw.complete(mock, p) == "HIT");
  CHECK_THROWS_AS(gw.complete(mock, text_prompt("different")), MockMiss);
}

TEST_CASE("image parts require a vision backend") {
  ScriptedMock blind("b", {{"x", "", "ok", false, 0}}, /*vision=*/false);
  Gateway gw;
  Prompt p = llm::make_prompt("sys", {TextPart{"x"}, llm::make_image_part(tiny_png())});
  CHECK_THROWS_AS(gw.complete(blind, p), CapabilityError);
}

TEST_CASE("prompt validation") {
  CHECK_THROWS_AS(llm::make_prompt("sys", {}), Error);
  CHECK_THROWS_AS(llm::make_image_part("not a png"), ImageDecodeError);
}

TEST_CASE("cache serves identical prompts without touching the backend") {
  auto cache = std::make_shared<llm::TranscriptCache>(temp_file("cache_basic.jsonl"));
  cache->ensure_meta("mock:t", "cfg");
  ScriptedMock mock("t", {{"ping", "", "pong", true, 0}});
  Gateway gw;
  gw.set_cache(cache);
  CHECK(gw.complete(mock, text_prompt("ping")) == "pong");
  CHECK(mock.calls() == 1);
  // Second identical call: served from cache even though the one-shot
  // script entry is consumed.
  CHECK(gw.complete(mock, text_prompt("ping")) == "pong");
  CHECK(mock.calls() == 1);
  CHECK(cache->size() == 1);
}

TEST_CASE("cache persists across instances byte-for-byte") {
  auto path = temp_file("cache_reload.jsonl");
  {
    auto cache = std::make_shared<llm::TranscriptCache>(path);
    cache->ensure_meta("mock:t", "cfg-hash");
    ScriptedMock mock("t", {{"q", "", "r1", true, 0}});
    Gateway gw;
    gw.set_cache(cache);
    CHECK(gw.complete(mock, text_prompt("q")) == "r1");
  }
  auto reloaded = std::make_shared<llm::TranscriptCache>(path);
  CHECK(reloaded->meta_backend() == std::string("mock:t"));
  CHECK(reloaded->meta_config_hash() == std::string("cfg-hash"));
  ScriptedMock empty("t", {});
  Gateway gw;
  gw.set_cache(reloaded);
  CHECK(gw.complete(empty, text_prompt("q")) == "r1");  // zero backend calls
  CHECK(empty.calls() == 0);
}

TEST_CASE("replay backend raises CacheMiss with the key") {
  auto path = temp_file("cache_replay.jsonl");
  auto cache = std::make_shared<llm::TranscriptCache>(path);
  cache->ensure_meta("mock:orig", "h");
  llm::ReplayBackend replay(cache);
  CHECK(replay.identity() == "mock:orig");
  Gateway gw;
  gw.set_cache(cache);
  try {
    gw.complete(replay, text_prompt("missing"));
    FAIL("expected CacheMiss");
  } catch (const CacheMiss& e) {
    CHECK(e.key() == Gateway::transcript_key("mock:orig", text_prompt("missing")));
  }
}

TEST_CASE("complete_structured parses on the first valid attempt") {
  ScriptedMock mock("t", {{"score", "", R"({"score": 0.7})", true, 0}});
  Gateway gw;
  nlohmann::json schema = {{"type", "object"},
                           {"required", {"score"}},
                           {"properties", {{"score", {{"type", "number"}}}}}};
  auto v = gw.complete_structured(mock, text_prompt("score this"), schema, 2);
  CHECK(v.at("score").get<double>() == 0.7);
  CHECK(mock.calls() == 1);
}

TEST_CASE("complete_structured repairs invalid-then-valid in exactly two calls") {
  ScriptedMock mock("t", {{"score", "", "not json at all", true, 0},
                          {"score", "", R"({"score": 1.0})", true, 0}});
  Gateway gw;
  nlohmann::json schema = {{"type", "object"},
                           {"required", {"score"}},
                           {"properties", {{"score", {{"type", "number"}}}}}};
  auto v = gw.complete_structured(mock, text_prompt("score this"), schema, 1);
  CHECK(v.at("score").get<double>() == 1.0);
  CHECK(mock.calls() == 2);
}

TEST_CASE("complete_structured exhausts after 1 + max_repairs attempts") {
  ScriptedMock mock("t", {{"score", "", "bogus", false, 0}});
  Gateway gw;
  nlohmann::json schema = {{"type", "object"}, {"required", {"score"}}};
  try {
    gw.complete_structured(mock, text_prompt("score this"), schema, 2);
    FAIL("expected StructuredOutputExhausted");
  } catch (const StructuredOutputExhausted& e) {
    CHECK(e.attempts().size() == 3);
  }
  CHECK(mock.calls() == 3);
}

TEST_CASE("schema validation catches shape errors") {
  nlohmann::json schema = {
      {"type", "object"},
      {"required", {"claims"}},
      {"properties", {{"claims", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
  CHECK_FALSE(llm::validate_schema(nlohmann::json::parse(R"({"claims": ["a"]})"), schema)
                  .has_value());
  CHECK(llm::validate_schema(nlohmann::json::parse(R"({"claims": [1]})"), schema).has_value());
  CHECK(llm::validate_schema(nlohmann::json::parse(R"({"other": []})"), schema).has_value());
  CHECK(llm::validate_schema(nlohmann::json::parse("[]"), schema).has_value());
}

TEST_CASE("extract_json tolerates prose and fences") {
  CHECK(llm::extract_json(R"({"a": 1})").has_value());
  CHECK(llm::extract_json("Sure! Here you go:\n```json\n{\"a\": 1}\n```").has_value());
  CHECK(llm::extract_json("the answer is {\"a\": {\"b\": [1,2]}} thanks").has_value());
  CHECK_FALSE(llm::extract_json("no json here").has_value());
  auto j = llm::extract_json("prefix {\"a\": \"with } brace\"} suffix");
  REQUIRE(j.has_value());
  CHECK(j->at("a").get<std::string>() == "with } brace");
}

TEST_CASE("gateway bounds in-flight backend calls") {
  std::vector<MockEntry> script;
  for (int i = 0; i < 12; ++i) script.push_back({"work", "", "done", true, 20});
  auto mock = std::make_shared<ScriptedMock>("slow", std::move(script));

  // Wrap to observe concurrency.
  struct Probe : llm::Backend {
    std::shared_ptr<ScriptedMock> inner;
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
    explicit Probe(std::shared_ptr<ScriptedMock> m) : inner(std::move(m)) {}
    std::string identity() const override { return inner->identity(); }
    bool supports_vision() const override { return true; }
    std::string complete_raw(const Prompt& p) override {
      int now = ++active;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {
      }
      std::string out = inner->complete_raw(p);
      --active;
      return out;
    }
  } probe(mock);

  Gateway::Options opts;
  opts.max_inflight = 3;
  Gateway gw(opts);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&gw, &probe, i] {
      gw.complete(probe, text_prompt("work " + std::to_string(i)));
    });
  }
  for (auto& t : threads) t.join();
  CHECK(probe.peak.load() <= 3);
  CHECK(gw.backend_calls() == 12);
}
