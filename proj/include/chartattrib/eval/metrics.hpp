#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartattrib/core/types.hpp"

namespace chartattrib::eval {

enum class LineCoverageMode { recall, precision_like };

struct EvalConfig {
  double iou_match_threshold = 0.9;
  LineCoverageMode line_coverage_mode = LineCoverageMode::recall;
};

/// area(a ∩ b) / area(a ∪ b); 0 when the union has zero area.
double iou(const core::BBox& a, const core::BBox& b);

struct Match {
  int pred = 0;
  int gt = 0;
  double iou = 0;
};

struct MatchResult {
  std::vector<Match> matches;             // one-to-one, descending IoU
  std::vector<double> gt_best_iou;        // matched IoU per GT region, else 0
};

/// Greedy one-to-one matching in descending IoU order; a pair matches iff
/// IoU >= threshold. Ties break on (gt index, pred index).
MatchResult match_regions(const std::vector<core::BBox>& predicted,
                          const std::vector<core::BBox>& gt, double threshold);

/// recall: covered GT points / all GT points.
/// precision_like: covered GT points / max(1, predicted region count).
double line_coverage(const std::vector<core::BBox>& predicted_regions,
                     const std::vector<core::Point>& gt_points, LineCoverageMode mode);

/// One evaluated sample: predicted boxes vs the ground-truth regions (or
/// points, for line charts) of the cells that support the answer.
struct SampleResult {
  std::string sample_id;
  core::ChartType chart_type = core::ChartType::bar;
  std::vector<core::BBox> predicted;
  std::vector<core::BBox> gt_regions;   // bar / pie
  std::vector<core::Point> gt_points;   // line
};

struct SampleReport {
  std::string sample_id;
  core::ChartType chart_type = core::ChartType::bar;
  double mean_iou = 0;     // over all GT regions, unmatched contribute 0
  double match_rate = 0;   // matched GT regions / GT regions
  std::optional<double> coverage;        // line, headline mode
  std::optional<double> coverage_alt;    // line, the other reading
};

struct EvalReport {
  std::vector<SampleReport> samples;
  // per chart type and overall aggregates (means over samples)
  std::map<std::string, nlohmann::json> per_type;
  double overall_mean_iou = 0;    // over bar+pie samples
  double overall_match_rate = 0;  // over bar+pie samples
  std::optional<double> overall_line_coverage;

  nlohmann::json to_json() const;
};

/// Throws MissingGroundTruth when a sample has neither regions nor points.
EvalReport evaluate_run(const std::vector<SampleResult>& results, const EvalConfig& config);

/// Plain-text table, one row per labeled run.
std::string format_report_table(
    const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace chartattrib::eval
