#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/pipeline/config.hpp"
#include "chartattrib/pipeline/evaluate.hpp"
#include "chartattrib/pipeline/runner.hpp"
#include "chartattrib/pipeline/synthesize.hpp"
#include "chartattrib/util/fsio.hpp"

namespace fs = std::filesystem;
using namespace chartattrib;

namespace {

// Positional sample arguments accept both files and directories; a
// directory contributes every *.sample.json inside it, sorted.
std::vector<fs::path> expand_samples(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& arg : args) {
    fs::path p(arg);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.path().filename().string().ends_with(".sample.json")) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

struct CommonFlags {
  std::string config_file;
  std::string backend;
  std::string detector;
  double threshold = -1;
  int top_k = -1;
  int max_iterations = -1;
  int parallelism = -1;
  std::string cache;
  std::string out;
  bool oracle_mapping = false;
  bool allow_config_change = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "JSON config file (flags override it)");
  cmd->add_option("--backend", flags.backend,
                  "mock:<script.json> | oracle:<samples-dir>[?mislocalize_every=N] | live");
  cmd->add_option("--detector", flags.detector, "oracle | detections:<dir>");
  cmd->add_option("--threshold", flags.threshold, "prefilter retention threshold [0,1]");
  cmd->add_option("--top-k", flags.top_k, "cells cited per claim");
  cmd->add_option("--max-iterations", flags.max_iterations,
                  "extraction self-reflection budget");
  cmd->add_option("--parallelism", flags.parallelism, "max concurrent samples/calls");
  cmd->add_option("--cache", flags.cache, "transcript cache (JSONL, append-only)");
  cmd->add_option("--out", flags.out, "output directory (default: runs/<timestamp>)");
  cmd->add_flag("--oracle-mapping", flags.oracle_mapping,
                "map cells via detector-carried cell links when available");
  cmd->add_flag("--allow-config-change", flags.allow_config_change,
                "let replay proceed despite a config hash mismatch");
}

pipeline::PipelineConfig build_config(const CommonFlags& flags) {
  pipeline::PipelineConfig cfg;
  if (!flags.config_file.empty()) {
    cfg = pipeline::PipelineConfig::from_json(
        nlohmann::json::parse(util::read_file(flags.config_file)));
  }
  if (!flags.backend.empty()) cfg.backend_spec = flags.backend;
  if (!flags.detector.empty()) cfg.detector_spec = flags.detector;
  if (flags.threshold >= 0) cfg.threshold = flags.threshold;
  if (flags.top_k > 0) cfg.top_k = flags.top_k;
  if (flags.max_iterations > 0) cfg.max_iterations = flags.max_iterations;
  if (flags.parallelism > 0) cfg.parallelism = flags.parallelism;
  if (!flags.cache.empty()) cfg.cache_path = flags.cache;
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (flags.oracle_mapping) cfg.oracle_mapping = true;
  if (flags.allow_config_change) cfg.allow_config_change = true;
  cfg.validate();
  return cfg;
}

int finish_run(const pipeline::RunOutcome& outcome) {
  std::cout << "completed " << outcome.completed.size() << " sample(s), "
            << outcome.failures.size() << " failure(s); artifacts under "
            << outcome.out_dir.string() << "\n";
  for (const auto& f : outcome.failures) {
    std::cerr << "  failed " << f.sample_id << ": " << f.error << "\n";
  }
  return outcome.failures.empty() ? 0 : 2;
}

int run_command(const CommonFlags& flags, const std::vector<std::string>& sample_args,
                pipeline::RunMode mode, bool replay) {
  pipeline::RunRequest request;
  request.config = build_config(flags);
  request.sample_files = expand_samples(sample_args);
  request.mode = mode;
  request.replay = replay;
  return finish_run(pipeline::run_pipeline(request));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chartattrib: fine-grained bounding-box citations for chart QA answers"};
  app.require_subcommand(1);

  CommonFlags attribute_flags, baseline_flags, replay_flags;
  std::vector<std::string> attribute_samples, baseline_samples, replay_samples;

  CLI::App* attribute = app.add_subcommand(
      "attribute", "run the full citation pipeline over samples");
  add_common_flags(attribute, attribute_flags);
  attribute->add_option("samples", attribute_samples, "sample.json files or directories")
      ->required();

  CLI::App* baseline = app.add_subcommand(
      "baseline", "zero-shot direct bounding-box prompting over samples");
  add_common_flags(baseline, baseline_flags);
  baseline->add_option("samples", baseline_samples, "sample.json files or directories")
      ->required();

  CLI::App* replay = app.add_subcommand(
      "replay", "re-run a cached attribution without any live calls");
  add_common_flags(replay, replay_flags);
  replay->add_option("samples", replay_samples, "sample.json files or directories")
      ->required();

  // synthesize
  std::string synth_tables, synth_out, synth_types = "bar,pie,line";
  uint64_t synth_seed = 0;
  CLI::App* synthesize = app.add_subcommand(
      "synthesize", "render tables into charts with ground-truth sidecars and QA");
  synthesize->add_option("--tables", synth_tables, "directory of table.json files")
      ->required();
  synthesize->add_option("--out", synth_out, "output directory")->required();
  synthesize->add_option("--chart-types", synth_types, "comma list of bar,pie,line");
  synthesize->add_option("--seed", synth_seed, "determinism seed");

  // evaluate
  std::vector<std::string> eval_citations;
  std::string eval_samples, eval_out;
  double eval_threshold = 0.9;
  std::string eval_line_mode = "recall";
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score citations against ground truth (IoU matching, line coverage)");
  evaluate
      ->add_option("--citations", eval_citations,
                   "citations directory, optionally label=dir; repeatable")
      ->required();
  evaluate->add_option("--samples", eval_samples, "directory of sample.json + ground truth")
      ->required();
  evaluate->add_option("--out", eval_out, "output directory for report.json/report.txt")
      ->required();
  evaluate->add_option("--iou-threshold", eval_threshold, "match threshold (default 0.9)");
  evaluate->add_option("--line-mode", eval_line_mode, "recall | precision_like");

  CLI11_PARSE(app, argc, argv);

  try {
    if (attribute->parsed()) {
      return run_command(attribute_flags, attribute_samples, pipeline::RunMode::attribute,
                         false);
    }
    if (baseline->parsed()) {
      return run_command(baseline_flags, baseline_samples, pipeline::RunMode::baseline,
                         false);
    }
    if (replay->parsed()) {
      return run_command(replay_flags, replay_samples, pipeline::RunMode::attribute, true);
    }
    if (synthesize->parsed()) {
      pipeline::SynthesisRequest request;
      request.tables_dir = synth_tables;
      request.out_dir = synth_out;
      request.seed = synth_seed;
      request.chart_types.clear();
      std::stringstream ss(synth_types);
      std::string type;
      while (std::getline(ss, type, ',')) {
        if (!type.empty()) request.chart_types.push_back(core::chart_type_from_string(type));
      }
      pipeline::SynthesisReport report = pipeline::synthesize_benchmark(request);
      std::cout << "wrote " << report.written.size() << " sample(s) to " << synth_out << "\n";
      for (const auto& [id, reason] : report.skipped) {
        std::cout << "  skipped " << id << ": " << reason << "\n";
      }
      return 0;
    }
    if (evaluate->parsed()) {
      pipeline::EvaluationRequest request;
      for (const auto& spec : eval_citations) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos) {
          request.runs.push_back({fs::path(spec).filename().string(), spec});
        } else {
          request.runs.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
        }
      }
      request.samples_dir = eval_samples;
      request.out_dir = eval_out;
      request.config.iou_match_threshold = eval_threshold;
      if (eval_line_mode == "recall") {
        request.config.line_coverage_mode = eval::LineCoverageMode::recall;
      } else if (eval_line_mode == "precision_like") {
        request.config.line_coverage_mode = eval::LineCoverageMode::precision_like;
      } else {
        throw ConfigError("unknown line mode: " + eval_line_mode);
      }
      pipeline::EvaluationOutcome outcome = pipeline::evaluate_directories(request);
      std::cout << outcome.table_text;
      return 0;
    }
  } catch (const CacheMiss& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
