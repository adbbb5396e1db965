#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chartattrib/chartgen/render.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/core/html_table.hpp"
#include "chartattrib/core/types.hpp"
#include "chartattrib/eval/metrics.hpp"
#include "chartattrib/pipeline/evaluate.hpp"
#include "chartattrib/pipeline/runner.hpp"
#include "chartattrib/pipeline/synthesize.hpp"

namespace py = pybind11;
using namespace chartattrib;

namespace {

core::BBox box_from_seq(const std::vector<double>& v) {
  if (v.size() != 4) throw Error("box needs [x0, y0, x1, y1]");
  return {v[0], v[1], v[2], v[3]};
}

nlohmann::json json_from_str(const std::string& s) { return nlohmann::json::parse(s); }

}  // namespace

PYBIND11_MODULE(_chartattrib, m) {
  m.doc() = "chart answer attribution: table extraction, retrieval, localization, eval";

  py::register_exception<Error>(m, "ChartAttribError");

  m.def("parse_table_html", [](const std::string& html) {
    return core::table_to_json(core::parse_table_html(html)).dump();
  });
  m.def("serialize_table_html", [](const std::string& table_json) {
    return core::serialize_table_html(core::table_from_json(json_from_str(table_json)));
  });

  m.def("iou", [](const std::vector<double>& a, const std::vector<double>& b) {
    return eval::iou(box_from_seq(a), box_from_seq(b));
  });
  m.def("match_regions",
        [](const std::vector<std::vector<double>>& predicted,
           const std::vector<std::vector<double>>& gt, double threshold) {
          std::vector<core::BBox> p, g;
          for (const auto& v : predicted) p.push_back(box_from_seq(v));
          for (const auto& v : gt) g.push_back(box_from_seq(v));
          auto result = eval::match_regions(p, g, threshold);
          py::list matches;
          for (const auto& match : result.matches) {
            matches.append(py::make_tuple(match.pred, match.gt, match.iou));
          }
          return py::make_tuple(matches, result.gt_best_iou);
        },
        py::arg("predicted"), py::arg("gt"), py::arg("threshold") = 0.9);
  m.def("line_coverage",
        [](const std::vector<std::vector<double>>& regions,
           const std::vector<std::pair<double, double>>& points, const std::string& mode) {
          std::vector<core::BBox> r;
          for (const auto& v : regions) r.push_back(box_from_seq(v));
          std::vector<core::Point> p;
          for (const auto& [x, y] : points) p.push_back({x, y});
          return eval::line_coverage(r, p,
                                     mode == "precision_like"
                                         ? eval::LineCoverageMode::precision_like
                                         : eval::LineCoverageMode::recall);
        },
        py::arg("regions"), py::arg("points"), py::arg("mode") = "recall");

  m.def("render_chart",
        [](const std::string& table_json, const std::string& chart_type, uint32_t style_seed,
           const std::string& layout_json) {
          core::DataTable table = core::table_from_json(json_from_str(table_json));
          core::ChartType type = core::chart_type_from_string(chart_type);
          chartgen::Layout layout = layout_json.empty()
                                        ? chartgen::default_layout(type)
                                        : chartgen::Layout::from_json(json_from_str(layout_json));
          auto result = chartgen::render_chart(table, type, layout, style_seed);
          return py::make_tuple(py::bytes(result.png), result.ground_truth.to_json().dump());
        },
        py::arg("table_json"), py::arg("chart_type"), py::arg("style_seed") = 0,
        py::arg("layout_json") = "");
  m.def("rasterize_check", [](const py::bytes& png, const std::string& gt_json) {
    img::Image image = img::decode_png(std::string(png));
    auto gt = chartgen::GroundTruth::from_json(json_from_str(gt_json));
    py::list out;
    for (const auto& check : chartgen::rasterize_check(image, gt)) {
      out.append(py::make_tuple(check.cell.row, check.cell.col, check.iou));
    }
    return out;
  });

  m.def("synthesize",
        [](const std::string& tables_dir, const std::string& out_dir,
           const std::vector<std::string>& chart_types, uint64_t seed) {
          pipeline::SynthesisRequest request;
          request.tables_dir = tables_dir;
          request.out_dir = out_dir;
          request.seed = seed;
          if (!chart_types.empty()) {
            request.chart_types.clear();
            for (const auto& t : chart_types) {
              request.chart_types.push_back(core::chart_type_from_string(t));
            }
          }
          auto report = pipeline::synthesize_benchmark(request);
          py::list skipped;
          for (const auto& [id, reason] : report.skipped) {
            skipped.append(py::make_tuple(id, reason));
          }
          return py::make_tuple(report.written, skipped);
        },
        py::arg("tables_dir"), py::arg("out_dir"),
        py::arg("chart_types") = std::vector<std::string>{}, py::arg("seed") = 0);

  m.def("attribute",
        [](const std::vector<std::string>& sample_files, const std::string& config_json) {
          pipeline::RunRequest request;
          request.config = pipeline::PipelineConfig::from_json(json_from_str(config_json));
          for (const auto& f : sample_files) request.sample_files.emplace_back(f);
          auto outcome = pipeline::run_pipeline(request);
          py::list failures;
          for (const auto& f : outcome.failures) {
            failures.append(py::make_tuple(f.sample_id, f.error));
          }
          return py::make_tuple(outcome.out_dir.string(), outcome.completed, failures);
        },
        py::arg("sample_files"), py::arg("config_json"));

  m.def("evaluate",
        [](const std::string& citations_dir, const std::string& samples_dir,
           const std::string& out_dir, double iou_threshold) {
          pipeline::EvaluationRequest request;
          request.runs.push_back({"run", citations_dir});
          request.samples_dir = samples_dir;
          request.out_dir = out_dir;
          request.config.iou_match_threshold = iou_threshold;
          auto outcome = pipeline::evaluate_directories(request);
          return outcome.reports.at(0).second.to_json().dump();
        },
        py::arg("citations_dir"), py::arg("samples_dir"), py::arg("out_dir"),
        py::arg("iou_threshold") = 0.9);

  m.attr("__version__") = "0.1.0";
}
