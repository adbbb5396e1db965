#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "chartattrib/chartgen/render.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/core/types.hpp"
#include "chartattrib/pipeline/evaluate.hpp"
#include "chartattrib/pipeline/runner.hpp"
#include "chartattrib/pipeline/synthesize.hpp"
#include "chartattrib/util/fsio.hpp"

using namespace chartattrib;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("CHARTATTRIB_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "CHARTATTRIB_CLI must point at the cli binary");
  std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) result.output.append(buf, n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "chartattrib_pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  util::write_file_atomic(path, j.dump(2) + "\n");
}

// Small all-numeric tables with unique headers per table.
void write_tables(const fs::path& dir, int count, const std::string& salt) {
  for (int i = 0; i < count; ++i) {
    std::string tag = salt + std::to_string(i);
    nlohmann::json table = {
        {"column_headers", {"C0" + tag, "C1" + tag}},
        {"row_headers", {"R0" + tag, "R1" + tag}},
        {"cells", {{10.0 + i, 40.0 + i}, {25.0 + i, 60.0 + i}}},
    };
    write_json(dir / ("t" + std::to_string(i) + ".json"), table);
  }
}

}  // namespace

TEST_CASE("synthesize_benchmark writes triples and skips pie-incompatible tables") {
  fs::path tables = fresh_dir("synth_tables");
  fs::path out = fresh_dir("synth_out");
  write_tables(tables, 2, "syn");
  // A table with a negative value: fine for bar? no (negative) -> skipped
  // for bar and pie, fine for line? also rejected (non-negative rule).
  write_json(tables / "neg.json", {{"column_headers", {"a", "b"}},
                                   {"row_headers", {"r"}},
                                   {"cells", {{-5.0, 10.0}}}});

  pipeline::SynthesisRequest request;
  request.tables_dir = tables;
  request.out_dir = out;
  request.seed = 7;
  auto report = pipeline::synthesize_benchmark(request);

  // 2 clean tables: bar+line ok, pie skipped (2 rows x 2 cols); neg table
  // skipped everywhere.
  CHECK(report.written.size() == 4);
  CHECK(report.skipped.size() == 5);
  for (const auto& id : report.written) {
    CHECK(fs::exists(out / (id + ".png")));
    CHECK(fs::exists(out / (id + ".sample.json")));
    CHECK(fs::exists(out / (id + ".groundtruth.json")));
  }
}

TEST_CASE("a chartspec sidecar pins chart type, layout, and style") {
  fs::path tables = fresh_dir("spec_tables");
  fs::path out = fresh_dir("spec_out");
  write_tables(tables, 1, "cs");
  write_json(tables / "t0.chartspec.json",
             {{"chart_type", "line"},
              {"layout", {{"width", 320}, {"height", 240}}},
              {"style_seed", 77}});
  pipeline::SynthesisRequest request;
  request.tables_dir = tables;
  request.out_dir = out;
  auto report = pipeline::synthesize_benchmark(request);
  // Only the pinned type renders, at the pinned size.
  REQUIRE(report.written == std::vector<std::string>{"t0__line"});
  auto gt = chartgen::GroundTruth::from_json(
      nlohmann::json::parse(util::read_file(out / "t0__line.groundtruth.json")));
  CHECK(gt.image_width == 320);
  CHECK(gt.image_height == 240);
}

TEST_CASE("synthesize is byte-deterministic under a fixed seed") {
  fs::path tables = fresh_dir("det_tables");
  write_tables(tables, 1, "det");
  fs::path out1 = fresh_dir("det_out1");
  fs::path out2 = fresh_dir("det_out2");
  pipeline::SynthesisRequest request;
  request.tables_dir = tables;
  request.seed = 42;
  request.out_dir = out1;
  pipeline::synthesize_benchmark(request);
  request.out_dir = out2;
  pipeline::synthesize_benchmark(request);
  for (const auto& entry : fs::directory_iterator(out1)) {
    fs::path other = out2 / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(util::read_file(entry.path()) == util::read_file(other));
  }
}

TEST_CASE("cli: oracle end-to-end attribute produces ground-truth boxes, exit 0") {
  fs::path tables = fresh_dir("e2e_tables");
  fs::path samples = fresh_dir("e2e_samples");
  write_tables(tables, 2, "cliA");
  CliResult synth = run_cli("synthesize --tables " + tables.string() + " --out " +
                            samples.string() + " --chart-types bar --seed 3");
  REQUIRE(synth.exit_code == 0);

  fs::path out = fresh_dir("e2e_out");
  fs::path cache = fresh_dir("e2e_cache") / "cache.jsonl";
  CliResult attr = run_cli("attribute --backend oracle:" + samples.string() +
                           " --detector oracle --oracle-mapping --top-k 1 --cache " +
                           cache.string() + " --out " + out.string() + " " +
                           samples.string());
  CAPTURE(attr.output);
  REQUIRE(attr.exit_code == 0);

  // Each sample's citation boxes equal its ground-truth cell regions.
  for (const auto& entry : fs::directory_iterator(samples)) {
    if (!entry.path().filename().string().ends_with(".sample.json")) continue;
    auto sample = pipeline::load_sample(entry.path());
    auto gt = sample.load_ground_truth();
    auto citations = core::citations_from_json(nlohmann::json::parse(
        util::read_file(out / "citations" / (sample.sample_id + ".json"))));
    REQUIRE(citations.size() == 1);
    REQUIRE(citations[0].cells.size() == 1);
    CHECK(citations[0].cells[0] == sample.gt_cells[0]);
    REQUIRE(citations[0].boxes.size() == 1);
    const auto* gt_entry = gt.find(sample.gt_cells[0]);
    REQUIRE(gt_entry);
    CHECK(citations[0].boxes[0] == *gt_entry->box);
  }

  SUBCASE("caption and annotated-image artifacts are written per sample") {
    for (const auto& entry : fs::directory_iterator(samples)) {
      if (!entry.path().filename().string().ends_with(".sample.json")) continue;
      auto sample = pipeline::load_sample(entry.path());
      auto captions = nlohmann::json::parse(
          util::read_file(out / "captions" / (sample.sample_id + ".json")));
      REQUIRE(sample.table.has_value());
      CHECK(captions.at("row_captions").size() == sample.table->rows());
      CHECK(captions.at("col_captions").size() == sample.table->cols());
      CHECK(captions.at("cell_captions").size() == sample.table->rows());
      img::Image annotated = img::decode_png(
          util::read_file(out / "annotated" / (sample.sample_id + ".png")));
      img::Image chart = img::decode_png(util::read_file(sample.image_path));
      CHECK(annotated.width() == chart.width());
      CHECK(annotated.height() == chart.height());
    }
  }

  SUBCASE("overlay images contain exactly the cited boxes") {
    for (const auto& entry : fs::directory_iterator(samples)) {
      if (!entry.path().filename().string().ends_with(".sample.json")) continue;
      auto sample = pipeline::load_sample(entry.path());
      auto citations = core::citations_from_json(nlohmann::json::parse(
          util::read_file(out / "citations" / (sample.sample_id + ".json"))));
      img::Image chart = img::decode_png(util::read_file(sample.image_path));
      img::Image expected = pipeline::render_overlay(chart, citations);
      std::string actual =
          util::read_file(out / "overlays" / (sample.sample_id + ".png"));
      CHECK(actual == img::encode_png(expected));
    }
  }

  SUBCASE("evaluate scores the run perfectly and exits 0") {
    fs::path eval_out = fresh_dir("e2e_eval");
    CliResult eval = run_cli("evaluate --citations pipeline=" + (out / "citations").string() +
                             " --samples " + samples.string() + " --out " +
                             eval_out.string());
    CAPTURE(eval.output);
    REQUIRE(eval.exit_code == 0);
    auto report = nlohmann::json::parse(util::read_file(eval_out / "report.json"));
    CHECK(report.at("runs").at(0).at("report").at("overall").at("mean_iou") == 1.0);
    CHECK(report.at("runs").at(0).at("report").at("overall").at("match_rate") == 1.0);
  }

  SUBCASE("replay from the cache is byte-identical and makes no live calls") {
    fs::path replay_out = fresh_dir("e2e_replay");
    CliResult replay = run_cli("replay --backend oracle:" + samples.string() +
                               " --detector oracle --oracle-mapping --top-k 1 --cache " +
                               cache.string() + " --out " + replay_out.string() + " " +
                               samples.string());
    CAPTURE(replay.output);
    REQUIRE(replay.exit_code == 0);
    for (const auto& entry : fs::directory_iterator(out / "citations")) {
      CHECK(util::read_file(entry.path()) ==
            util::read_file(replay_out / "citations" / entry.path().filename()));
    }

    // Changed config refuses without --allow-config-change.
    fs::path replay_out2 = fresh_dir("e2e_replay2");
    CliResult refused = run_cli("replay --backend oracle:" + samples.string() +
                                " --detector oracle --oracle-mapping --top-k 2 --cache " +
                                cache.string() + " --out " + replay_out2.string() + " " +
                                samples.string());
    CHECK(refused.exit_code == 1);
    CHECK(refused.output.find("config") != std::string::npos);

    CliResult allowed = run_cli("replay --backend oracle:" + samples.string() +
                                " --detector oracle --oracle-mapping --top-k 1 --cache " +
                                cache.string() + " --out " + replay_out2.string() +
                                " --allow-config-change " + samples.string());
    CHECK(allowed.exit_code == 0);
  }
}

TEST_CASE("cli: missing image file exits 1 naming the path") {
  fs::path dir = fresh_dir("missing_image");
  nlohmann::json sample = {{"sample_id", "s0"},
                           {"chart_type", "bar"},
                           {"image", "nope.png"},
                           {"question", "q"},
                           {"answer", "a"},
                           {"gt_cells", nlohmann::json::array()}};
  write_json(dir / "s0.sample.json", sample);
  CliResult result = run_cli("attribute --backend oracle:" + dir.string() + " " +
                             (dir / "s0.sample.json").string());
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("nope.png") != std::string::npos);
}

TEST_CASE("cli: one bad sample of three -> exit 2, two outputs, failure manifest") {
  fs::path tables = fresh_dir("partial_tables");
  fs::path samples = fresh_dir("partial_samples");
  write_tables(tables, 2, "part");
  CliResult synth = run_cli("synthesize --tables " + tables.string() + " --out " +
                            samples.string() + " --chart-types bar --seed 5");
  REQUIRE(synth.exit_code == 0);

  // A third sample the oracle backend has not indexed: it validates fine
  // upfront but every model call for it misses.
  fs::path other_tables = fresh_dir("partial_other_tables");
  fs::path other_samples = fresh_dir("partial_other_samples");
  write_tables(other_tables, 1, "stray");
  fs::rename(other_tables / "t0.json", other_tables / "zz.json");
  REQUIRE(run_cli("synthesize --tables " + other_tables.string() + " --out " +
                  other_samples.string() + " --chart-types bar --seed 6")
              .exit_code == 0);

  fs::path out = fresh_dir("partial_out");
  CliResult attr = run_cli("attribute --backend oracle:" + samples.string() +
                           " --detector oracle --oracle-mapping --top-k 1 --out " +
                           out.string() + " " + samples.string() + " " +
                           (other_samples / "zz__bar.sample.json").string());
  CAPTURE(attr.output);
  CHECK(attr.exit_code == 2);
  CHECK(fs::exists(out / "citations" / "t0__bar.json"));
  CHECK(fs::exists(out / "citations" / "t1__bar.json"));
  auto manifest = nlohmann::json::parse(util::read_file(out / "manifest.json"));
  REQUIRE(manifest.at("failures").size() == 1);
  CHECK(manifest.at("failures").at(0).at("sample_id") == "zz__bar");
}

TEST_CASE("cli: baseline writes box-only citations that evaluate comparably") {
  fs::path tables = fresh_dir("base_tables");
  fs::path samples = fresh_dir("base_samples");
  write_tables(tables, 2, "base");
  REQUIRE(run_cli("synthesize --tables " + tables.string() + " --out " + samples.string() +
                  " --chart-types bar --seed 11")
              .exit_code == 0);

  fs::path pipeline_out = fresh_dir("base_pipeline");
  fs::path baseline_out = fresh_dir("base_baseline");
  REQUIRE(run_cli("attribute --backend oracle:" + samples.string() +
                  " --detector oracle --oracle-mapping --top-k 1 --out " +
                  pipeline_out.string() + " " + samples.string())
              .exit_code == 0);
  REQUIRE(run_cli("baseline --backend oracle:" + samples.string() + " --out " +
                  baseline_out.string() + " " + samples.string())
              .exit_code == 0);

  auto j = nlohmann::json::parse(
      util::read_file(baseline_out / "citations" / "t0__bar.json"));
  CHECK(j.at("citations").at(0).at("cells").empty());
  CHECK_FALSE(j.at("citations").at(0).at("boxes").empty());

  fs::path eval_out = fresh_dir("base_eval");
  CliResult eval = run_cli("evaluate --citations pipeline=" +
                           (pipeline_out / "citations").string() + " --citations baseline=" +
                           (baseline_out / "citations").string() + " --samples " +
                           samples.string() + " --out " + eval_out.string());
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.output.find("pipeline") != std::string::npos);
  CHECK(eval.output.find("baseline") != std::string::npos);
  auto table_text = util::read_file(eval_out / "report.txt");
  CHECK(table_text.find("Method") != std::string::npos);
}

TEST_CASE("cli: evaluate exits 1 on sample id mismatch") {
  fs::path tables = fresh_dir("mismatch_tables");
  fs::path samples = fresh_dir("mismatch_samples");
  write_tables(tables, 1, "mis");
  REQUIRE(run_cli("synthesize --tables " + tables.string() + " --out " + samples.string() +
                  " --chart-types bar --seed 2")
              .exit_code == 0);
  fs::path citations = fresh_dir("mismatch_citations");
  write_json(citations / "other.json",
             {{"sample_id", "other"}, {"citations", nlohmann::json::array()}});
  CliResult eval = run_cli("evaluate --citations " + citations.string() + " --samples " +
                           samples.string() + " --out " + fresh_dir("mismatch_out").string());
  CHECK(eval.exit_code == 1);
  CHECK(eval.output.find("mismatch") != std::string::npos);
}

TEST_CASE("run_pipeline validates sample files upfront") {
  pipeline::RunRequest request;
  request.config.backend_spec = "oracle:/nonexistent";
  request.sample_files = {fs::path("/definitely/not/here.sample.json")};
  CHECK_THROWS_AS(pipeline::run_pipeline(request), ConfigError);
}
