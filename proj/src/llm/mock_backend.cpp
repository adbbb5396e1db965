#include "chartattrib/llm/mock_backend.hpp"

#include <chrono>
#include <thread>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/llm/gateway.hpp"
#include "chartattrib/util/fsio.hpp"
#include "chartattrib/util/hash.hpp"

namespace chartattrib::llm {

ScriptedMock::ScriptedMock(std::string name, std::vector<MockEntry> script, bool vision)
    : name_(std::move(name)), vision_(vision), script_(std::move(script)) {
  used_.resize(script_.size(), false);
}

std::shared_ptr<ScriptedMock> ScriptedMock::from_json(const std::string& name,
                                                      const nlohmann::json& j) {
  std::vector<MockEntry> entries;
  for (const auto& je : j.value("entries", nlohmann::json::array())) {
    MockEntry e;
    e.substring = je.value("match", "");
    e.prompt_hash = je.value("hash", "");
    if (e.substring.empty() && e.prompt_hash.empty()) {
      throw ConfigError("mock entry needs 'match' or 'hash'");
    }
    e.response = je.at("response").get<std::string>();
    e.one_shot = je.value("one_shot", true);
    e.delay_ms = je.value("delay_ms", 0);
    entries.push_back(std::move(e));
  }
  return std::make_shared<ScriptedMock>(name, std::move(entries), j.value("vision", true));
}

std::shared_ptr<ScriptedMock> ScriptedMock::from_file(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(util::read_file(path));
  return from_json(std::filesystem::path(path).stem().string(), j);
}

std::string ScriptedMock::complete_raw(const Prompt& prompt) {
  std::string rendered = prompt.rendered();
  std::string hash;
  int delay = 0;
  std::string response;
  {
    std::lock_guard lock(mutex_);
    ++calls_;
    bool found = false;
    for (size_t i = 0; i < script_.size(); ++i) {
      if (used_[i]) continue;
      const MockEntry& e = script_[i];
      bool hit = false;
      if (!e.substring.empty()) {
        hit = rendered.find(e.substring) != std::string::npos;
      } else {
        if (hash.empty()) hash = util::sha256_hex(rendered);
        hit = hash == e.prompt_hash;
      }
      if (!hit) continue;
      if (e.one_shot) used_[i] = true;
      response = e.response;
      delay = e.delay_ms;
      found = true;
      break;
    }
    if (!found) {
      throw MockMiss("no scripted response for prompt: " +
                     rendered.substr(0, std::min<size_t>(rendered.size(), 200)));
    }
  }
  if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
  return response;
}

ReplayBackend::ReplayBackend(std::shared_ptr<TranscriptCache> cache)
    : cache_(std::move(cache)) {
  auto backend = cache_->meta_backend();
  if (!backend || backend->empty()) {
    throw ConfigError("replay cache has no meta line; was it produced by this tool?");
  }
  identity_ = *backend;
}

std::string ReplayBackend::complete_raw(const Prompt& prompt) {
  // The gateway resolves cache hits before calling the backend, so any
  // call landing here is by definition a miss.
  std::string key = Gateway::transcript_key(identity_, prompt);
  throw CacheMiss("transcript cache is missing key " + key, key);
}

}  // namespace chartattrib::llm
