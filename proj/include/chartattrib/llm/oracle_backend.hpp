#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "chartattrib/llm/backend.hpp"

namespace chartattrib::llm {

/// Scripted-by-construction backend for synthetic benchmarks: it indexes a
/// directory of samples (by chart-image hash and by answer text) and
/// answers every agent prompt from ground truth — extraction returns the
/// source table as HTML, prefiltering scores the supporting row/column
/// 1.0, re-ranking puts the supporting cell first, mapping picks the
/// correct mark. Verification prompts always come back consistent.
///
/// `mislocalize_every` > 0 corrupts every Nth mapping assignment by
/// pointing it at a different mark (for degradation studies).
class OracleBackend : public Backend {
 public:
  explicit OracleBackend(const std::filesystem::path& samples_dir, int mislocalize_every = 0);
  ~OracleBackend() override;

  std::string identity() const override;
  bool supports_vision() const override { return true; }
  std::string complete_raw(const Prompt& prompt) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chartattrib::llm
