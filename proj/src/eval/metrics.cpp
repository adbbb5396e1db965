#include "chartattrib/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::eval {

double iou(const core::BBox& a, const core::BBox& b) {
  double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

MatchResult match_regions(const std::vector<core::BBox>& predicted,
                          const std::vector<core::BBox>& gt, double threshold) {
  struct Pair {
    double iou;
    int gt;
    int pred;
  };
  std::vector<Pair> pairs;
  pairs.reserve(predicted.size() * gt.size());
  for (int g = 0; g < int(gt.size()); ++g) {
    for (int p = 0; p < int(predicted.size()); ++p) {
      double v = iou(predicted[p], gt[g]);
      if (v >= threshold) pairs.push_back({v, g, p});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.pred < b.pred;
  });

  MatchResult out;
  out.gt_best_iou.assign(gt.size(), 0.0);
  std::vector<bool> gt_used(gt.size(), false), pred_used(predicted.size(), false);
  for (const auto& pair : pairs) {
    if (gt_used[pair.gt] || pred_used[pair.pred]) continue;
    gt_used[pair.gt] = true;
    pred_used[pair.pred] = true;
    out.matches.push_back({pair.pred, pair.gt, pair.iou});
    out.gt_best_iou[pair.gt] = pair.iou;
  }
  return out;
}

namespace {

bool point_in_box(const core::Point& p, const core::BBox& b) {
  return p.x >= b.x_min && p.x <= b.x_max && p.y >= b.y_min && p.y <= b.y_max;
}

}  // namespace

double line_coverage(const std::vector<core::BBox>& predicted_regions,
                     const std::vector<core::Point>& gt_points, LineCoverageMode mode) {
  if (gt_points.empty()) throw Error("line_coverage needs at least one ground-truth point");
  size_t covered = 0;
  for (const auto& p : gt_points) {
    for (const auto& r : predicted_regions) {
      if (point_in_box(p, r)) {
        ++covered;
        break;
      }
    }
  }
  if (mode == LineCoverageMode::recall) {
    return double(covered) / double(gt_points.size());
  }
  return double(covered) / double(std::max<size_t>(1, predicted_regions.size()));
}

EvalReport evaluate_run(const std::vector<SampleResult>& results, const EvalConfig& config) {
  if (config.iou_match_threshold <= 0 || config.iou_match_threshold > 1) {
    throw Error("iou_match_threshold must be in (0,1]");
  }
  EvalReport report;
  // Deterministic aggregation order.
  std::vector<const SampleResult*> ordered;
  for (const auto& r : results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const SampleResult* a, const SampleResult* b) {
              return a->sample_id < b->sample_id;
            });

  struct Agg {
    double iou_sum = 0;
    double rate_sum = 0;
    double coverage_sum = 0;
    int box_samples = 0;
    int line_samples = 0;
  };
  std::map<std::string, Agg> per_type;
  Agg overall;

  for (const SampleResult* r : ordered) {
    SampleReport sr;
    sr.sample_id = r->sample_id;
    sr.chart_type = r->chart_type;
    Agg& type_agg = per_type[core::to_string(r->chart_type)];
    if (r->chart_type == core::ChartType::line) {
      if (r->gt_points.empty()) {
        throw MissingGroundTruth("sample " + r->sample_id + " has no ground-truth points");
      }
      sr.coverage = line_coverage(r->predicted, r->gt_points, config.line_coverage_mode);
      sr.coverage_alt = line_coverage(r->predicted, r->gt_points,
                                      config.line_coverage_mode == LineCoverageMode::recall
                                          ? LineCoverageMode::precision_like
                                          : LineCoverageMode::recall);
      type_agg.coverage_sum += *sr.coverage;
      type_agg.line_samples += 1;
      overall.coverage_sum += *sr.coverage;
      overall.line_samples += 1;
    } else {
      if (r->gt_regions.empty()) {
        throw MissingGroundTruth("sample " + r->sample_id + " has no ground-truth regions");
      }
      MatchResult m = match_regions(r->predicted, r->gt_regions, config.iou_match_threshold);
      double iou_sum = 0;
      for (double v : m.gt_best_iou) iou_sum += v;
      sr.mean_iou = iou_sum / double(r->gt_regions.size());
      sr.match_rate = double(m.matches.size()) / double(r->gt_regions.size());
      type_agg.iou_sum += sr.mean_iou;
      type_agg.rate_sum += sr.match_rate;
      type_agg.box_samples += 1;
      overall.iou_sum += sr.mean_iou;
      overall.rate_sum += sr.match_rate;
      overall.box_samples += 1;
    }
    report.samples.push_back(std::move(sr));
  }

  for (const auto& [type, agg] : per_type) {
    nlohmann::json j;
    j["samples"] = agg.box_samples + agg.line_samples;
    if (agg.box_samples > 0) {
      j["mean_iou"] = agg.iou_sum / agg.box_samples;
      j["match_rate"] = agg.rate_sum / agg.box_samples;
    }
    if (agg.line_samples > 0) {
      j["line_coverage"] = agg.coverage_sum / agg.line_samples;
    }
    report.per_type[type] = std::move(j);
  }
  if (overall.box_samples > 0) {
    report.overall_mean_iou = overall.iou_sum / overall.box_samples;
    report.overall_match_rate = overall.rate_sum / overall.box_samples;
  }
  if (overall.line_samples > 0) {
    report.overall_line_coverage = overall.coverage_sum / overall.line_samples;
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per_sample = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json js = {{"sample_id", s.sample_id},
                         {"chart_type", core::to_string(s.chart_type)}};
    if (s.coverage) {
      js["line_coverage"] = *s.coverage;
      js["line_coverage_alt"] = *s.coverage_alt;
    } else {
      js["mean_iou"] = s.mean_iou;
      js["match_rate"] = s.match_rate;
    }
    per_sample.push_back(std::move(js));
  }
  nlohmann::json types(nlohmann::json::value_t::object);
  for (const auto& [k, v] : per_type) types[k] = v;
  nlohmann::json overall = {{"mean_iou", overall_mean_iou},
                            {"match_rate", overall_match_rate}};
  if (overall_line_coverage) overall["line_coverage"] = *overall_line_coverage;
  return {{"overall", std::move(overall)},
          {"per_type", std::move(types)},
          {"per_sample", std::move(per_sample)}};
}

std::string format_report_table(
    const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ostringstream out;
  auto fmt = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    s << v;
    return s.str();
  };
  size_t name_w = 6;
  for (const auto& [name, _] : rows) name_w = std::max(name_w, name.size());
  out << std::string(name_w, ' ').replace(0, 6, "Method")
      << " | Mean IoU | Match@thr | Line coverage\n";
  out << std::string(name_w, '-') << "-|----------|-----------|--------------\n";
  for (const auto& [name, report] : rows) {
    std::string padded = name + std::string(name_w - name.size(), ' ');
    out << padded << " | " << fmt(report.overall_mean_iou) << "    | "
        << fmt(report.overall_match_rate) << "     | "
        << (report.overall_line_coverage ? fmt(*report.overall_line_coverage) : "n/a")
        << "\n";
  }
  return out.str();
}

}  // namespace chartattrib::eval
