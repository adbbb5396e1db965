#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace chartattrib::llm {

/// One persisted model exchange.
struct Transcript {
  std::string key;       // sha256 of (backend identity, rendered prompt)
  std::string backend;
  std::string raw_response;
  bool parsed_ok = false;  // raw response contained parseable JSON
  std::string timestamp;   // ISO-8601 UTC
};

/// Append-only JSONL transcript store. The first line is a meta record
/// carrying the backend identity and the pipeline config hash so replays
/// can refuse mismatched configurations. Writes are serialized; lookups
/// are served from memory, so readers never see torn entries.
class TranscriptCache {
 public:
  /// Opens or creates the cache file. Loads existing entries.
  explicit TranscriptCache(std::filesystem::path path);

  /// Writes the meta line when the file is empty; otherwise verifies the
  /// stored backend identity and returns the stored meta.
  void ensure_meta(const std::string& backend_identity, const std::string& config_hash);

  std::optional<std::string> meta_backend() const;
  std::optional<std::string> meta_config_hash() const;

  std::optional<std::string> lookup(const std::string& key) const;
  void append(const Transcript& t);

  size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> responses_;
  std::optional<std::string> meta_backend_;
  std::optional<std::string> meta_config_hash_;
  bool has_meta_line_ = false;
};

std::string utc_timestamp();

}  // namespace chartattrib::llm
