#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chartattrib/eval/metrics.hpp"

namespace chartattrib::pipeline {

struct EvaluationRun {
  std::string label;
  std::filesystem::path citations_dir;
};

struct EvaluationRequest {
  std::vector<EvaluationRun> runs;
  std::filesystem::path samples_dir;  // *.sample.json + groundtruth sidecars
  std::filesystem::path out_dir;
  eval::EvalConfig config;
};

struct EvaluationOutcome {
  std::vector<std::pair<std::string, eval::EvalReport>> reports;
  std::string table_text;
};

/// Joins citations with their samples' ground truth and evaluates each
/// labeled run. Sample ids must match exactly on both sides; writes
/// report.json and report.txt under out_dir.
EvaluationOutcome evaluate_directories(const EvaluationRequest& request);

}  // namespace chartattrib::pipeline
