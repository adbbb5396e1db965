#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "chartattrib/llm/backend.hpp"
#include "chartattrib/llm/cache.hpp"

namespace chartattrib::llm {

/// Single chokepoint for model calls: capability checks, bounded in-flight
/// parallelism, transcript caching, and structured-output repair.
class Gateway {
 public:
  struct Options {
    int max_inflight = 4;
    int max_repairs = 2;
    int transport_retries = 2;  // extra attempts after the first, live only
  };

  Gateway() : Gateway(Options{}) {}
  explicit Gateway(Options opts);

  /// Attaches a transcript cache; identical (backend, prompt) pairs are
  /// then served from it without touching the backend.
  void set_cache(std::shared_ptr<TranscriptCache> cache);
  std::shared_ptr<TranscriptCache> cache() const { return cache_; }

  /// Raw completion. Persists a transcript when a cache is attached.
  std::string complete(Backend& backend, const Prompt& prompt);

  /// Validator returns an error message for invalid output, nullopt when
  /// acceptable. On failure the prompt is re-issued with the error
  /// appended, up to max_repairs extra attempts.
  std::string complete_with_repair(
      Backend& backend, const Prompt& prompt,
      const std::function<std::optional<std::string>(const std::string&)>& validate,
      int max_repairs);

  /// JSON-schema flavored repair loop; returns the parsed value.
  nlohmann::json complete_structured(Backend& backend, const Prompt& prompt,
                                     const nlohmann::json& schema, int max_repairs);
  nlohmann::json complete_structured(Backend& backend, const Prompt& prompt,
                                     const nlohmann::json& schema);

  int default_max_repairs() const { return opts_.max_repairs; }

  /// Backend invocations performed (cache hits excluded).
  long backend_calls() const;

  static std::string transcript_key(const std::string& backend_identity, const Prompt& prompt);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  Options opts_;
  std::shared_ptr<TranscriptCache> cache_;
};

/// Repair suffix applied between attempts.
Prompt with_repair_feedback(const Prompt& prompt, const std::string& error);

}  // namespace chartattrib::llm
