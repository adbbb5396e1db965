#pragma once

#include <memory>
#include <string>

#include "chartattrib/llm/backend.hpp"

namespace chartattrib::llm {

/// Chat-completions client for any OpenAI-compatible endpoint. Image parts
/// travel as base64 data URLs. Configuration comes from the environment:
/// CHARTATTRIB_API_BASE, CHARTATTRIB_API_KEY, CHARTATTRIB_MODEL.
class LiveBackend : public Backend {
 public:
  LiveBackend(std::string base_url, std::string api_key, std::string model,
              bool vision = true, int timeout_seconds = 120);

  /// Builds from environment variables; throws ConfigError when unset.
  static std::shared_ptr<LiveBackend> from_env(const std::string& model_override = "");

  std::string identity() const override { return "live:" + model_; }
  bool supports_vision() const override { return vision_; }
  std::string complete_raw(const Prompt& prompt) override;

  const std::string& model() const { return model_; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
  bool vision_;
  int timeout_seconds_;
};

}  // namespace chartattrib::llm
