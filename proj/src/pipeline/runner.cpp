#include "chartattrib/pipeline/runner.hpp"

#include <algorithm>

#include "chartattrib/agents/captioning.hpp"
#include "chartattrib/agents/chart2table.hpp"
#include "chartattrib/agents/localization.hpp"
#include "chartattrib/agents/reformulate.hpp"
#include "chartattrib/agents/retrieval.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/llm/gateway.hpp"
#include "chartattrib/llm/mock_backend.hpp"
#include "chartattrib/util/fsio.hpp"
#include "chartattrib/util/hash.hpp"
#include "chartattrib/util/parallel.hpp"

namespace chartattrib::pipeline {

namespace fs = std::filesystem;

std::string run_config_hash(const PipelineConfig& config, RunMode mode) {
  return util::sha256_hex(config.config_hash() +
                          (mode == RunMode::attribute ? "|attribute" : "|baseline"));
}

img::Image render_overlay(const img::Image& chart,
                          const std::vector<core::Citation>& citations) {
  img::Image out = chart;
  const img::Color highlight{220, 30, 30};
  int w = chart.width(), h = chart.height();
  for (const auto& citation : citations) {
    for (const auto& box : citation.boxes) {
      out.draw_rect_outline(box.x_min * w, box.y_min * h, box.x_max * w, box.y_max * h, 2,
                            highlight);
    }
  }
  return out;
}

namespace {

struct LoadedSample {
  AttributionSample sample;
  img::Image image;
  llm::ImagePart image_part;
};

LoadedSample load_and_validate(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("sample file does not exist: " + path.string());
  AttributionSample sample = load_sample(path);
  if (!fs::exists(sample.image_path)) {
    throw ConfigError("missing image file: " + sample.image_path.string());
  }
  std::string png = util::read_file(sample.image_path);
  img::Image image = img::decode_png(png);  // throws ImageDecodeError
  llm::ImagePart part = llm::make_image_part(std::move(png));
  return {std::move(sample), std::move(image), std::move(part)};
}

agents::DetectorPtr make_detector(const PipelineConfig& cfg, const AttributionSample& sample) {
  if (cfg.detector_spec == "oracle") {
    return std::make_shared<agents::SyntheticOracleDetector>(sample.load_ground_truth());
  }
  const std::string prefix = "detections:";
  if (cfg.detector_spec.rfind(prefix, 0) == 0) {
    fs::path dir = cfg.detector_spec.substr(prefix.size());
    return std::make_shared<agents::FileDetector>(
        (dir / (sample.sample_id + ".detections.json")).string());
  }
  throw ConfigError("unknown detector spec '" + cfg.detector_spec +
                    "' (expected oracle or detections:<dir>)");
}

struct SampleArtifacts {
  std::vector<core::Citation> citations;
  nlohmann::json traces = nlohmann::json::array();
  nlohmann::json captions;              // row/col/cell captions
  std::optional<std::string> annotated_png;  // set-of-marks labeled image
  std::vector<std::string> claim_failures;
};

SampleArtifacts attribute_sample(llm::Gateway& gateway, llm::Backend& backend,
                                 const PipelineConfig& cfg, const LoadedSample& loaded) {
  const AttributionSample& sample = loaded.sample;
  SampleArtifacts artifacts;

  agents::ExtractOptions extract_opts;
  extract_opts.max_iterations = cfg.max_iterations;
  extract_opts.max_repairs = cfg.max_repairs;
  agents::ExtractionResult extraction = agents::extract_table(
      gateway, backend, loaded.image_part, sample.chart_type, extract_opts);
  const core::DataTable& table = extraction.table;

  agents::ClaimSet claims =
      agents::decompose_answer(gateway, backend, sample.question, sample.answer);

  agents::CaptionOptions caption_opts;
  caption_opts.parallelism = cfg.parallelism;
  agents::CaptionSet captions = agents::caption_table(gateway, backend, table, caption_opts);
  artifacts.captions = {{"row_captions", captions.row_captions},
                        {"col_captions", captions.col_captions},
                        {"cell_captions", captions.cell_captions}};

  agents::DetectorPtr detector = make_detector(cfg, sample);
  std::vector<agents::DataMark> marks =
      agents::detect_marks(loaded.image, sample.chart_type, *detector);

  std::optional<llm::ImagePart> annotated;
  if (!marks.empty()) {
    annotated = llm::make_image_part(
        img::encode_png(agents::annotate_marks(loaded.image, marks)));
    artifacts.annotated_png = annotated->png_bytes;
  }

  agents::RetrievalConfig retrieval_cfg;
  retrieval_cfg.threshold = cfg.threshold;
  retrieval_cfg.top_k = cfg.top_k;
  retrieval_cfg.parallelism = cfg.parallelism;

  for (const core::Claim& claim : claims.claims) {
    try {
      agents::RetrievalTrace trace = agents::retrieve_citation_cells(
          gateway, backend, table, captions, claim, retrieval_cfg);

      core::Citation citation;
      citation.claim_index = claim.index;
      citation.claim_text = claim.text;
      citation.cells = trace.cited;
      citation.rationale = trace.ranking.rationale;

      if (!marks.empty() && annotated) {
        agents::LocalizeOptions loc_opts;
        loc_opts.use_oracle_mapping = cfg.oracle_mapping;
        agents::LocalizationResult localized =
            agents::localize_cells(gateway, backend, loaded.image, *annotated, marks,
                                   trace.cited, table, claim, loc_opts);
        for (const auto& assignment : localized.assignments) {
          for (const auto& mark : marks) {
            if (mark.id == assignment.mark_id) {
              citation.boxes.push_back(mark.region);
              break;
            }
          }
        }
      }

      artifacts.traces.push_back(trace.to_json(claim));
      artifacts.citations.push_back(std::move(citation));
    } catch (const CacheMiss&) {
      throw;
    } catch (const Error& e) {
      artifacts.claim_failures.push_back("claim " + std::to_string(claim.index) + ": " +
                                         e.what());
    }
  }
  return artifacts;
}

SampleArtifacts baseline_sample(llm::Gateway& gateway, llm::Backend& backend,
                                const LoadedSample& loaded) {
  const AttributionSample& sample = loaded.sample;
  SampleArtifacts artifacts;
  agents::ClaimSet claims =
      agents::decompose_answer(gateway, backend, sample.question, sample.answer);
  for (const core::Claim& claim : claims.claims) {
    try {
      std::vector<core::BBox> boxes =
          agents::direct_bbox_baseline(gateway, backend, loaded.image_part, claim);
      core::Citation citation;
      citation.claim_index = claim.index;
      citation.claim_text = claim.text;
      citation.boxes = std::move(boxes);
      citation.rationale = "zero-shot direct bounding-box prompt";
      artifacts.citations.push_back(std::move(citation));
    } catch (const CacheMiss&) {
      throw;
    } catch (const Error& e) {
      artifacts.claim_failures.push_back("claim " + std::to_string(claim.index) + ": " +
                                         e.what());
    }
  }
  return artifacts;
}

}  // namespace

RunOutcome run_pipeline(const RunRequest& request) {
  const PipelineConfig& cfg = request.config;
  cfg.validate();
  if (request.sample_files.empty()) throw ConfigError("no sample files given");

  // Upfront validation: every sample must load and decode before any
  // backend work starts.
  std::vector<LoadedSample> loaded;
  loaded.reserve(request.sample_files.size());
  for (const auto& path : request.sample_files) {
    try {
      loaded.push_back(load_and_validate(path));
    } catch (const Error& e) {
      throw ConfigError("sample validation failed for " + path.string() + ": " + e.what());
    }
  }

  fs::path out_dir = cfg.out_dir.empty()
                         ? fs::path("runs") / llm::utc_timestamp()
                         : fs::path(cfg.out_dir);
  fs::create_directories(out_dir);

  std::string config_hash = run_config_hash(cfg, request.mode);

  std::shared_ptr<llm::TranscriptCache> cache;
  if (!cfg.cache_path.empty()) {
    cache = std::make_shared<llm::TranscriptCache>(cfg.cache_path);
  }

  llm::BackendPtr backend;
  if (request.replay) {
    if (!cache) throw ConfigError("replay needs --cache");
    auto stored = cache->meta_config_hash();
    if (!cfg.allow_config_change && stored && *stored != config_hash) {
      throw ConfigError(
          "replay refused: configuration differs from the cached run "
          "(use --allow-config-change to override)");
    }
    backend = std::make_shared<llm::ReplayBackend>(cache);
  } else {
    backend = make_backend(cfg);
    if (cache) cache->ensure_meta(backend->identity(), config_hash);
  }

  llm::Gateway::Options gw_opts;
  gw_opts.max_inflight = cfg.parallelism;
  gw_opts.max_repairs = cfg.max_repairs;
  llm::Gateway gateway(gw_opts);
  if (cache) gateway.set_cache(cache);

  struct SlotResult {
    bool ok = false;
    std::string error;
    std::vector<core::Citation> citations;
  };
  std::vector<SlotResult> results(loaded.size());

  util::parallel_for(loaded.size(), size_t(cfg.parallelism), [&](size_t i) {
    const LoadedSample& item = loaded[i];
    SlotResult& slot = results[i];
    try {
      SampleArtifacts artifacts =
          request.mode == RunMode::attribute
              ? attribute_sample(gateway, *backend, cfg, item)
              : baseline_sample(gateway, *backend, item);

      nlohmann::json citations_json =
          core::citations_to_json(item.sample.sample_id, artifacts.citations);
      util::write_file_atomic(
          out_dir / "citations" / (item.sample.sample_id + ".json"),
          citations_json.dump(2) + "\n");
      if (request.mode == RunMode::attribute) {
        util::write_file_atomic(
            out_dir / "traces" / (item.sample.sample_id + ".retrieval_trace.json"),
            artifacts.traces.dump(2) + "\n");
        util::write_file_atomic(out_dir / "captions" / (item.sample.sample_id + ".json"),
                                artifacts.captions.dump(2) + "\n");
        if (artifacts.annotated_png) {
          util::write_file_atomic(out_dir / "annotated" / (item.sample.sample_id + ".png"),
                                  *artifacts.annotated_png);
        }
      }
      img::Image overlay = render_overlay(item.image, artifacts.citations);
      util::write_file_atomic(out_dir / "overlays" / (item.sample.sample_id + ".png"),
                              img::encode_png(overlay));

      if (!artifacts.claim_failures.empty()) {
        slot.error = "claim failures: ";
        for (const auto& f : artifacts.claim_failures) slot.error += f + "; ";
      } else {
        slot.ok = true;
      }
      slot.citations = std::move(artifacts.citations);
    } catch (const CacheMiss&) {
      throw;  // a replay can never fall through to a live backend
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  RunOutcome outcome;
  outcome.out_dir = out_dir;
  outcome.backend_calls = gateway.backend_calls();
  for (size_t i = 0; i < loaded.size(); ++i) {
    if (results[i].ok) {
      outcome.completed.push_back(loaded[i].sample.sample_id);
    } else {
      outcome.failures.push_back({loaded[i].sample.sample_id, results[i].error});
    }
  }

  nlohmann::json manifest = {
      {"version", "0.1.0"},
      {"mode", request.mode == RunMode::attribute ? "attribute" : "baseline"},
      {"replay", request.replay},
      {"timestamp", llm::utc_timestamp()},
      {"config", cfg.to_json()},
      {"config_hash", config_hash},
      {"backend", backend->identity()},
      {"backend_calls", outcome.backend_calls},
      {"samples", loaded.size()},
      {"completed", outcome.completed},
  };
  if (cache) {
    manifest["cache"] = cfg.cache_path;
    manifest["cache_hash"] = util::sha256_hex(util::read_file(cache->path()));
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : outcome.failures) {
    failures.push_back({{"sample_id", f.sample_id}, {"error", f.error}});
  }
  manifest["failures"] = std::move(failures);
  util::write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");

  return outcome;
}

}  // namespace chartattrib::pipeline
