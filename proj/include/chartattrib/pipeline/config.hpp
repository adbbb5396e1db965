#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "chartattrib/llm/backend.hpp"

namespace chartattrib::pipeline {

/// Run configuration; a JSON config file provides defaults, CLI flags
/// override individual fields.
struct PipelineConfig {
  std::string backend_spec = "live";      // mock:<script> | oracle:<dir>[?opt] | live
  std::string detector_spec = "oracle";   // oracle | detections:<dir>
  double threshold = 0.4;
  int top_k = 3;
  int max_iterations = 3;
  int max_repairs = 2;
  int parallelism = 4;
  std::string cache_path;                 // empty: no transcript cache
  std::string out_dir;                    // empty: timestamped ./runs/<ts>
  bool oracle_mapping = false;            // bypass mapping when marks carry cells
  bool allow_config_change = false;       // replay guard override
  std::map<std::string, std::string> models;  // per-agent model names (live)

  void validate() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Hash of the output-relevant knobs; stored in cache meta and checked
  /// by replay.
  std::string config_hash() const;
};

llm::BackendPtr make_backend(const PipelineConfig& cfg);

}  // namespace chartattrib::pipeline
