#include "chartattrib/pipeline/evaluate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/pipeline/sample.hpp"
#include "chartattrib/util/fsio.hpp"

namespace chartattrib::pipeline {

namespace fs = std::filesystem;

namespace {

std::set<std::string> citation_ids(const fs::path& dir) {
  std::set<std::string> out;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.insert(entry.path().stem().string());
  }
  return out;
}

std::map<std::string, fs::path> sample_files(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    const std::string suffix = ".sample.json";
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      out[name.substr(0, name.size() - suffix.size())] = entry.path();
    }
  }
  return out;
}

}  // namespace

EvaluationOutcome evaluate_directories(const EvaluationRequest& request) {
  if (request.runs.empty()) throw ConfigError("no citation directories to evaluate");
  auto samples = sample_files(request.samples_dir);

  EvaluationOutcome outcome;
  for (const auto& run : request.runs) {
    auto ids = citation_ids(run.citations_dir);
    std::set<std::string> sample_ids;
    for (const auto& [id, path] : samples) sample_ids.insert(id);
    if (ids != sample_ids) {
      std::string detail;
      for (const auto& id : ids) {
        if (!sample_ids.count(id)) detail += " +" + id;
      }
      for (const auto& id : sample_ids) {
        if (!ids.count(id)) detail += " -" + id;
      }
      throw ConfigError("sample id mismatch between " + run.citations_dir.string() +
                        " and " + request.samples_dir.string() + ":" + detail);
    }

    std::vector<eval::SampleResult> results;
    for (const auto& id : ids) {
      AttributionSample sample = load_sample(samples.at(id));
      chartgen::GroundTruth gt = sample.load_ground_truth();
      nlohmann::json citations_json = nlohmann::json::parse(
          util::read_file(run.citations_dir / (id + ".json")));
      std::vector<core::Citation> citations = core::citations_from_json(citations_json);

      eval::SampleResult result;
      result.sample_id = id;
      result.chart_type = sample.chart_type;
      for (const auto& citation : citations) {
        for (const auto& box : citation.boxes) result.predicted.push_back(box);
      }
      for (const auto& cell : sample.gt_cells) {
        const chartgen::GtEntry* entry = gt.find(cell);
        if (!entry) {
          throw MissingGroundTruth("sample " + id + ": no ground-truth entry for cell (" +
                                   std::to_string(cell.row) + "," + std::to_string(cell.col) +
                                   ")");
        }
        if (sample.chart_type == core::ChartType::line) {
          for (const auto& p : entry->points) result.gt_points.push_back(p);
        } else if (entry->box) {
          result.gt_regions.push_back(*entry->box);
        }
      }
      results.push_back(std::move(result));
    }
    outcome.reports.emplace_back(run.label, eval::evaluate_run(results, request.config));
  }

  outcome.table_text = eval::format_report_table(outcome.reports);

  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& [label, report] : outcome.reports) {
    runs_json.push_back({{"label", label}, {"report", report.to_json()}});
  }
  nlohmann::json report_json = {{"runs", std::move(runs_json)}};
  fs::create_directories(request.out_dir);
  util::write_file_atomic(request.out_dir / "report.json", report_json.dump(2) + "\n");
  util::write_file_atomic(request.out_dir / "report.txt", outcome.table_text);
  return outcome;
}

}  // namespace chartattrib::pipeline
