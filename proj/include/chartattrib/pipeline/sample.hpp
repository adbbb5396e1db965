#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chartattrib/chartgen/geometry.hpp"
#include "chartattrib/core/types.hpp"

namespace chartattrib::pipeline {

/// One attribution task: a chart image with a question/answer pair to
/// ground. Synthetic samples carry their source table and ground truth.
struct AttributionSample {
  std::string sample_id;
  core::ChartType chart_type = core::ChartType::bar;
  std::filesystem::path image_path;
  std::string question;
  std::string answer;
  std::optional<core::DataTable> table;
  std::optional<std::filesystem::path> ground_truth_path;
  std::vector<core::CellRef> gt_cells;  // cells supporting the answer

  chartgen::GroundTruth load_ground_truth() const;
};

/// Loads <name>.sample.json; relative file references resolve against the
/// sample's directory. Throws on malformed samples (missing files are
/// reported by the pipeline's upfront validation pass instead).
AttributionSample load_sample(const std::filesystem::path& sample_json_path);

nlohmann::json sample_to_json(const AttributionSample& sample,
                              const std::filesystem::path& base_dir);

}  // namespace chartattrib::pipeline
