#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartattrib/llm/backend.hpp"
#include "chartattrib/llm/cache.hpp"

namespace chartattrib::llm {

/// One scripted exchange. A matcher is either a substring of the rendered
/// prompt or a sha256 hex of it. One-shot entries are consumed on use.
struct MockEntry {
  std::string substring;  // used when non-empty
  std::string prompt_hash;  // sha256 hex of the rendered prompt
  std::string response;
  bool one_shot = true;
  int delay_ms = 0;  // test hook for concurrency checks
};

/// Deterministic scripted backend: first matching entry wins, in script
/// order; unmatched prompts raise MockMiss.
class ScriptedMock : public Backend {
 public:
  ScriptedMock(std::string name, std::vector<MockEntry> script, bool vision = true);

  /// Loads {"vision": bool, "entries": [{"match"|"hash", "response", "one_shot"}]}.
  static std::shared_ptr<ScriptedMock> from_file(const std::string& path);
  static std::shared_ptr<ScriptedMock> from_json(const std::string& name,
                                                 const nlohmann::json& j);

  std::string identity() const override { return "mock:" + name_; }
  bool supports_vision() const override { return vision_; }
  std::string complete_raw(const Prompt& prompt) override;

  long calls() const { return calls_; }

 private:
  std::string name_;
  bool vision_;
  std::mutex mutex_;
  std::vector<MockEntry> script_;
  std::vector<bool> used_;
  long calls_ = 0;
};

/// Serves completions from a frozen transcript cache only; any miss is a
/// CacheMiss carrying the offending key. Presents the original backend's
/// identity so keys line up.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<TranscriptCache> cache);

  std::string identity() const override { return identity_; }
  bool supports_vision() const override { return true; }
  std::string complete_raw(const Prompt& prompt) override;

 private:
  std::shared_ptr<TranscriptCache> cache_;
  std::string identity_;
};

}  // namespace chartattrib::llm
