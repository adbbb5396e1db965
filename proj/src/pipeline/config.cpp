#include "chartattrib/pipeline/config.hpp"

#include "chartattrib/core/errors.hpp"
#include "chartattrib/llm/live_backend.hpp"
#include "chartattrib/llm/mock_backend.hpp"
#include "chartattrib/llm/oracle_backend.hpp"
#include "chartattrib/util/fsio.hpp"
#include "chartattrib/util/hash.hpp"

namespace chartattrib::pipeline {

void PipelineConfig::validate() const {
  if (threshold < 0 || threshold > 1) throw ConfigError("threshold must be in [0,1]");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (max_repairs < 0) throw ConfigError("max_repairs must be >= 0");
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  cfg.backend_spec = j.value("backend", cfg.backend_spec);
  cfg.detector_spec = j.value("detector", cfg.detector_spec);
  cfg.threshold = j.value("threshold", cfg.threshold);
  cfg.top_k = j.value("top_k", cfg.top_k);
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.max_repairs = j.value("max_repairs", cfg.max_repairs);
  cfg.parallelism = j.value("parallelism", cfg.parallelism);
  cfg.cache_path = j.value("cache", cfg.cache_path);
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.oracle_mapping = j.value("oracle_mapping", cfg.oracle_mapping);
  cfg.allow_config_change = j.value("allow_config_change", cfg.allow_config_change);
  if (j.contains("models")) {
    for (auto it = j.at("models").begin(); it != j.at("models").end(); ++it) {
      cfg.models[it.key()] = it.value().get<std::string>();
    }
  }
  return cfg;
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json models_json(nlohmann::json::value_t::object);
  for (const auto& [agent, model] : models) models_json[agent] = model;
  return {{"backend", backend_spec},
          {"detector", detector_spec},
          {"threshold", threshold},
          {"top_k", top_k},
          {"max_iterations", max_iterations},
          {"max_repairs", max_repairs},
          {"parallelism", parallelism},
          {"cache", cache_path},
          {"out", out_dir},
          {"oracle_mapping", oracle_mapping},
          {"models", std::move(models_json)}};
}

std::string PipelineConfig::config_hash() const {
  // Only knobs that influence pipeline outputs; paths and parallelism
  // deliberately excluded so replays can move between directories.
  nlohmann::json j = {{"backend", backend_spec},
                      {"detector", detector_spec},
                      {"threshold", threshold},
                      {"top_k", top_k},
                      {"max_iterations", max_iterations},
                      {"max_repairs", max_repairs},
                      {"oracle_mapping", oracle_mapping}};
  nlohmann::json models_json(nlohmann::json::value_t::object);
  for (const auto& [agent, model] : models) models_json[agent] = model;
  j["models"] = std::move(models_json);
  return util::sha256_hex(j.dump());
}

llm::BackendPtr make_backend(const PipelineConfig& cfg) {
  const std::string& spec = cfg.backend_spec;
  if (spec.rfind("mock:", 0) == 0) {
    return llm::ScriptedMock::from_file(spec.substr(5));
  }
  if (spec.rfind("oracle:", 0) == 0) {
    std::string rest = spec.substr(7);
    int every = 0;
    size_t q = rest.find('?');
    if (q != std::string::npos) {
      std::string opts = rest.substr(q + 1);
      rest = rest.substr(0, q);
      const std::string key = "mislocalize_every=";
      if (opts.rfind(key, 0) == 0) {
        every = std::stoi(opts.substr(key.size()));
      } else {
        throw ConfigError("unknown oracle backend option: " + opts);
      }
    }
    return std::make_shared<llm::OracleBackend>(rest, every);
  }
  if (spec == "live") {
    std::string model;
    if (auto it = cfg.models.find("default"); it != cfg.models.end()) model = it->second;
    return llm::LiveBackend::from_env(model);
  }
  throw ConfigError("unknown backend spec '" + spec +
                    "' (expected mock:<script>, oracle:<dir>, or live)");
}

}  // namespace chartattrib::pipeline
