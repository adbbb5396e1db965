#include "chartattrib/llm/cache.hpp"

#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::llm {

namespace fs = std::filesystem;

TranscriptCache::TranscriptCache(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error("corrupt transcript cache line in " + path_.string());
    if (j.contains("meta")) {
      meta_backend_ = j["meta"].value("backend", "");
      meta_config_hash_ = j["meta"].value("config_hash", "");
      has_meta_line_ = true;
      continue;
    }
    responses_[j.at("key").get<std::string>()] = j.at("raw_response").get<std::string>();
  }
}

void TranscriptCache::ensure_meta(const std::string& backend_identity,
                                  const std::string& config_hash) {
  std::lock_guard lock(mutex_);
  if (has_meta_line_) return;
  nlohmann::json meta = {
      {"meta", {{"backend", backend_identity}, {"config_hash", config_hash}}}};
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot open cache for append: " + path_.string());
  out << meta.dump() << '\n';
  out.flush();
  meta_backend_ = backend_identity;
  meta_config_hash_ = config_hash;
  has_meta_line_ = true;
}

std::optional<std::string> TranscriptCache::meta_backend() const {
  std::lock_guard lock(mutex_);
  return meta_backend_;
}

std::optional<std::string> TranscriptCache::meta_config_hash() const {
  std::lock_guard lock(mutex_);
  return meta_config_hash_;
}

std::optional<std::string> TranscriptCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = responses_.find(key);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

void TranscriptCache::append(const Transcript& t) {
  std::lock_guard lock(mutex_);
  if (responses_.count(t.key)) return;
  nlohmann::json j = {{"key", t.key},
                      {"backend", t.backend},
                      {"raw_response", t.raw_response},
                      {"parsed_ok", t.parsed_ok},
                      {"timestamp", t.timestamp}};
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot open cache for append: " + path_.string());
  out << j.dump() << '\n';
  out.flush();
  responses_[t.key] = t.raw_response;
}

size_t TranscriptCache::size() const {
  std::lock_guard lock(mutex_);
  return responses_.size();
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace chartattrib::llm
