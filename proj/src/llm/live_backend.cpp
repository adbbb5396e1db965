#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "chartattrib/llm/live_backend.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/util/hash.hpp"

namespace chartattrib::llm {

namespace {

// Splits "https://host[:port]/prefix" into client origin and path prefix.
struct ParsedUrl {
  std::string origin;
  std::string prefix;
};

ParsedUrl split_url(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("API base must include scheme: " + url);
  size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

}  // namespace

LiveBackend::LiveBackend(std::string base_url, std::string api_key, std::string model,
                         bool vision, int timeout_seconds)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      model_(std::move(model)),
      vision_(vision),
      timeout_seconds_(timeout_seconds) {
  if (base_url_.empty()) throw ConfigError("live backend needs a base URL");
  if (model_.empty()) throw ConfigError("live backend needs a model name");
}

std::shared_ptr<LiveBackend> LiveBackend::from_env(const std::string& model_override) {
  const char* base = std::getenv("CHARTATTRIB_API_BASE");
  const char* key = std::getenv("CHARTATTRIB_API_KEY");
  const char* model = std::getenv("CHARTATTRIB_MODEL");
  if (!base || !*base) throw ConfigError("CHARTATTRIB_API_BASE is not set");
  std::string model_name = !model_override.empty() ? model_override
                           : model && *model       ? model
                                                   : "gpt-4o";
  return std::make_shared<LiveBackend>(base, key ? key : "", model_name);
}

std::string LiveBackend::complete_raw(const Prompt& prompt) {
  nlohmann::json content = nlohmann::json::array();
  for (const auto& part : prompt.user_parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", text->text}});
    } else {
      const auto& image = std::get<ImagePart>(part);
      content.push_back(
          {{"type", "image_url"},
           {"image_url",
            {{"url", "data:image/png;base64," + util::base64_encode(image.png_bytes)}}}});
    }
  }
  nlohmann::json messages = nlohmann::json::array();
  if (!prompt.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", prompt.system}});
  }
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  nlohmann::json body = {{"model", model_},
                         {"messages", std::move(messages)},
                         {"temperature", prompt.temperature},
                         {"max_tokens", prompt.max_tokens}};

  ParsedUrl url = split_url(base_url_);
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(url.prefix + "/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) {
    throw TransportError("request to " + base_url_ +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 300));
  }
  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw TransportError("endpoint returned non-JSON body");
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected completion shape: ") + e.what());
  }
}

}  // namespace chartattrib::llm
