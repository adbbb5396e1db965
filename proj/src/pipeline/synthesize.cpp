#include "chartattrib/pipeline/synthesize.hpp"

#include <algorithm>
#include <random>

#include "chartattrib/chartgen/render.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/util/fsio.hpp"

namespace chartattrib::pipeline {

namespace fs = std::filesystem;

AttributionSample load_sample(const fs::path& sample_json_path) {
  nlohmann::json j = nlohmann::json::parse(util::read_file(sample_json_path));
  AttributionSample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.chart_type = core::chart_type_from_string(j.at("chart_type").get<std::string>());
  fs::path base = sample_json_path.parent_path();
  s.image_path = base / j.at("image").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  if (j.contains("table") && !j.at("table").is_null()) {
    s.table = core::table_from_json(j.at("table"));
  }
  if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
    s.ground_truth_path = base / j.at("ground_truth").get<std::string>();
  }
  for (const auto& jc : j.value("gt_cells", nlohmann::json::array())) {
    s.gt_cells.push_back({jc.at(0).get<int>(), jc.at(1).get<int>()});
  }
  if (s.table) {
    for (const auto& cell : s.gt_cells) {
      if (cell.row < 0 || size_t(cell.row) >= s.table->rows() || cell.col < 0 ||
          size_t(cell.col) >= s.table->cols()) {
        throw Error("sample " + s.sample_id + ": gt cell out of table range");
      }
    }
  }
  return s;
}

chartgen::GroundTruth AttributionSample::load_ground_truth() const {
  if (!ground_truth_path) {
    throw MissingGroundTruth("sample " + sample_id + " has no ground-truth sidecar");
  }
  return chartgen::GroundTruth::from_json(
      nlohmann::json::parse(util::read_file(*ground_truth_path)));
}

nlohmann::json sample_to_json(const AttributionSample& sample, const fs::path& base_dir) {
  nlohmann::json j = {
      {"sample_id", sample.sample_id},
      {"chart_type", core::to_string(sample.chart_type)},
      {"image", fs::relative(sample.image_path, base_dir).string()},
      {"question", sample.question},
      {"answer", sample.answer},
  };
  if (sample.table) j["table"] = core::table_to_json(*sample.table);
  if (sample.ground_truth_path) {
    j["ground_truth"] = fs::relative(*sample.ground_truth_path, base_dir).string();
  }
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : sample.gt_cells) cells.push_back({c.row, c.col});
  j["gt_cells"] = std::move(cells);
  return j;
}

namespace {

// Templated QA over one target cell, so oracle backends can answer
// mechanically and evaluation has an unambiguous supporting cell.
std::pair<std::string, std::string> templated_qa(const core::DataTable& table,
                                                 core::CellRef cell) {
  const std::string& row = table.row_headers()[cell.row];
  const std::string& col = table.column_headers()[cell.col];
  std::string value = core::format_cell(table.at(cell.row, cell.col));
  return {"What is the value of " + row + " in " + col + "?",
          "The value of " + row + " in " + col + " is " + value + "."};
}

}  // namespace

SynthesisReport synthesize_benchmark(const SynthesisRequest& request) {
  SynthesisReport report;
  fs::create_directories(request.out_dir);

  std::vector<fs::path> table_files;
  for (const auto& entry : fs::directory_iterator(request.tables_dir)) {
    std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".json" && !name.ends_with(".chartspec.json")) {
      table_files.push_back(entry.path());
    }
  }
  std::sort(table_files.begin(), table_files.end());
  if (table_files.empty()) {
    throw Error("no .json tables under " + request.tables_dir.string());
  }

  for (const auto& table_path : table_files) {
    core::DataTable table =
        core::table_from_json(nlohmann::json::parse(util::read_file(table_path)));

    // Optional sidecar pinning chart type, layout, and style for this table.
    fs::path spec_path = table_path.parent_path() / (table_path.stem().string() +
                                                     ".chartspec.json");
    std::optional<nlohmann::json> chart_spec;
    std::vector<core::ChartType> types = request.chart_types;
    if (fs::exists(spec_path)) {
      chart_spec = nlohmann::json::parse(util::read_file(spec_path));
      types = {core::chart_type_from_string(chart_spec->at("chart_type").get<std::string>())};
    }

    for (core::ChartType type : types) {
      std::string sample_id = table_path.stem().string() + "__" + core::to_string(type);
      // Per-sample deterministic randomness: seed + sample id.
      std::seed_seq seq(sample_id.begin(), sample_id.end());
      std::mt19937 rng(uint32_t(request.seed) ^ std::mt19937(seq)());
      try {
        chartgen::Layout layout = chartgen::default_layout(type);
        if (request.layout) layout = *request.layout;
        uint32_t style_seed = uint32_t(rng());
        if (chart_spec) {
          if (chart_spec->contains("layout")) {
            layout = chartgen::Layout::from_json(chart_spec->at("layout"));
          }
          style_seed = chart_spec->value("style_seed", style_seed);
        }
        auto render = chartgen::render_chart(table, type, layout, style_seed);

        // Target cell must be one the chart actually renders.
        if (render.ground_truth.entries.empty()) throw UnrenderableTable("no entries");
        std::uniform_int_distribution<size_t> pick(0,
                                                   render.ground_truth.entries.size() - 1);
        core::CellRef target = render.ground_truth.entries[pick(rng)].cell;
        auto [question, answer] = templated_qa(table, target);

        AttributionSample sample;
        sample.sample_id = sample_id;
        sample.chart_type = type;
        sample.image_path = request.out_dir / (sample_id + ".png");
        sample.question = question;
        sample.answer = answer;
        sample.table = table;
        sample.ground_truth_path = request.out_dir / (sample_id + ".groundtruth.json");
        sample.gt_cells = {target};

        util::write_file_atomic(sample.image_path, render.png);
        util::write_file_atomic(*sample.ground_truth_path,
                                render.ground_truth.to_json().dump(2) + "\n");
        util::write_file_atomic(request.out_dir / (sample_id + ".sample.json"),
                                sample_to_json(sample, request.out_dir).dump(2) + "\n");
        report.written.push_back(sample_id);
      } catch (const UnrenderableTable& e) {
        report.skipped.push_back({sample_id, e.what()});
      }
    }
  }
  return report;
}

}  // namespace chartattrib::pipeline
