#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chartattrib/core/types.hpp"
#include "chartattrib/img/image.hpp"
#include "chartattrib/pipeline/config.hpp"
#include "chartattrib/pipeline/sample.hpp"

namespace chartattrib::pipeline {

enum class RunMode { attribute, baseline };

struct RunRequest {
  std::vector<std::filesystem::path> sample_files;
  PipelineConfig config;
  RunMode mode = RunMode::attribute;
  bool replay = false;  // serve everything from the cache; any miss fails
};

struct SampleFailure {
  std::string sample_id;
  std::string error;
};

struct RunOutcome {
  std::filesystem::path out_dir;
  std::vector<std::string> completed;  // sample ids
  std::vector<SampleFailure> failures;
  long backend_calls = 0;
};

/// Validates all samples upfront (files exist, images decode); throws
/// ConfigError on any problem so the CLI can exit 1 before touching the
/// backend. Per-sample processing failures are recorded and do not stop
/// the batch.
RunOutcome run_pipeline(const RunRequest& request);

/// Overlay with every cited box outlined; shared by the runner and the
/// artifact cross-checks.
img::Image render_overlay(const img::Image& chart, const std::vector<core::Citation>& citations);

/// Mode tag folded into the replay config-hash check.
std::string run_config_hash(const PipelineConfig& config, RunMode mode);

}  // namespace chartattrib::pipeline
