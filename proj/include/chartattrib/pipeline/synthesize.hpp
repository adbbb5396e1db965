#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chartattrib/chartgen/geometry.hpp"
#include "chartattrib/pipeline/sample.hpp"

namespace chartattrib::pipeline {

struct SynthesisRequest {
  std::filesystem::path tables_dir;
  std::filesystem::path out_dir;
  std::vector<core::ChartType> chart_types = {core::ChartType::bar, core::ChartType::pie,
                                              core::ChartType::line};
  uint64_t seed = 0;
  std::optional<chartgen::Layout> layout;  // default: per-chart-type layout
};

struct SynthesisReport {
  std::vector<std::string> written;  // sample ids
  std::vector<std::pair<std::string, std::string>> skipped;  // id, reason
};

/// Renders every table x chart type into (PNG, groundtruth.json,
/// sample.json) triples with templated QA over one target cell.
/// Deterministic under a fixed seed; incompatible combinations are
/// skipped and reported.
SynthesisReport synthesize_benchmark(const SynthesisRequest& request);

}  // namespace chartattrib::pipeline
