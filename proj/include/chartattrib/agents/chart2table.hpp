#pragma once

#include <string>
#include <vector>

#include "chartattrib/chartgen/render.hpp"
#include "chartattrib/core/types.hpp"
#include "chartattrib/llm/gateway.hpp"

namespace chartattrib::agents {

struct ReflectionVerdict {
  bool consistent = false;
  std::vector<std::string> discrepancies;
};

struct ExtractionResult {
  core::DataTable table;
  int iterations = 1;
  bool consistent = false;
  std::vector<std::string> transcript_keys;
};

struct ExtractOptions {
  int max_iterations = 3;
  int max_repairs = 2;
};

/// Asks the backend whether a re-rendered chart matches the original.
/// A "consistent" verdict carrying discrepancies is normalized to
/// inconsistent.
ReflectionVerdict reflect_consistency(llm::Gateway& gateway, llm::Backend& backend,
                                      const llm::ImagePart& original,
                                      const llm::ImagePart& rerendered,
                                      const core::DataTable& table);

/// Extraction loop: prompt for an HTML table (few-shot, per chart type),
/// parse it, re-render it, and ask the backend to compare against the
/// original; refine with the reported discrepancies until consistent or
/// the iteration budget runs out.
ExtractionResult extract_table(llm::Gateway& gateway, llm::Backend& backend,
                               const llm::ImagePart& image, core::ChartType chart_type,
                               const ExtractOptions& opts = {});

/// The hardcoded few-shot exemplar tables, rendered on demand.
std::vector<std::pair<llm::ImagePart, std::string>> extraction_exemplars(
    core::ChartType chart_type);

}  // namespace chartattrib::agents
