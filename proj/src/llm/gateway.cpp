#include "chartattrib/llm/gateway.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/img/image.hpp"
#include "chartattrib/llm/schema.hpp"
#include "chartattrib/util/hash.hpp"

namespace chartattrib::llm {

bool Prompt::has_images() const {
  for (const auto& part : user_parts) {
    if (std::holds_alternative<ImagePart>(part)) return true;
  }
  return false;
}

std::string Prompt::rendered() const {
  std::string out = "system: " + system + "\n";
  for (const auto& part : user_parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      out += text->text;
      out += '\n';
    } else {
      out += "[image sha256=" + std::get<ImagePart>(part).sha256 + "]\n";
    }
  }
  out += "temperature=" + nlohmann::json(temperature).dump() +
         " max_tokens=" + std::to_string(max_tokens);
  return out;
}

ImagePart make_image_part(std::string png_bytes) {
  img::decode_png(png_bytes);  // throws ImageDecodeError on bad input
  std::string digest = util::sha256_hex(png_bytes);
  return ImagePart{std::move(png_bytes), std::move(digest)};
}

Prompt make_prompt(std::string system, std::vector<PromptPart> parts) {
  if (parts.empty()) throw Error("prompt needs at least one user part");
  Prompt p;
  p.system = std::move(system);
  p.user_parts = std::move(parts);
  return p;
}

// Counting semaphore bounding in-flight backend calls.
struct Gateway::Impl {
  std::mutex mutex;
  std::condition_variable cv;
  int available = 4;
  std::atomic<long> calls{0};

  void acquire() {
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mutex);
      ++available;
    }
    cv.notify_one();
  }
};

Gateway::Gateway(Options opts) : impl_(std::make_shared<Impl>()), opts_(opts) {
  if (opts_.max_inflight < 1) throw Error("max_inflight must be >= 1");
  impl_->available = opts_.max_inflight;
}

void Gateway::set_cache(std::shared_ptr<TranscriptCache> cache) { cache_ = std::move(cache); }

long Gateway::backend_calls() const { return impl_->calls.load(); }

std::string Gateway::transcript_key(const std::string& backend_identity,
                                    const Prompt& prompt) {
  return util::sha256_hex(backend_identity + "\x1f" + prompt.rendered());
}

std::string Gateway::complete(Backend& backend, const Prompt& prompt) {
  if (prompt.user_parts.empty()) throw Error("prompt needs at least one user part");
  if (prompt.has_images() && !backend.supports_vision()) {
    throw CapabilityError("image part sent to non-vision backend '" + backend.identity() + "'");
  }
  std::string key = transcript_key(backend.identity(), prompt);
  if (cache_) {
    if (auto hit = cache_->lookup(key)) return *hit;
  }

  std::string raw;
  int attempts_left = 1 + opts_.transport_retries;
  for (;;) {
    impl_->acquire();
    struct Release {
      Impl* impl;
      ~Release() { impl->release(); }
    } release{impl_.get()};
    try {
      ++impl_->calls;
      raw = backend.complete_raw(prompt);
      break;
    } catch (const TransportError&) {
      if (--attempts_left <= 0) throw;
    }
  }

  if (cache_) {
    cache_->append(Transcript{key, backend.identity(), raw,
                              extract_json(raw).has_value(), utc_timestamp()});
  }
  return raw;
}

Prompt with_repair_feedback(const Prompt& prompt, const std::string& error) {
  Prompt repaired = prompt;
  repaired.user_parts.push_back(TextPart{
      "\n---\nYour previous output failed validation: " + error +
      ". Emit only valid JSON matching the schema."});
  return repaired;
}

std::string Gateway::complete_with_repair(
    Backend& backend, const Prompt& prompt,
    const std::function<std::optional<std::string>(const std::string&)>& validate,
    int max_repairs) {
  if (max_repairs < 0) max_repairs = 0;
  std::vector<std::string> attempts;
  Prompt current = prompt;
  for (int attempt = 0; attempt <= max_repairs; ++attempt) {
    std::string raw = complete(backend, current);
    auto err = validate(raw);
    if (!err) return raw;
    attempts.push_back(raw);
    current = with_repair_feedback(prompt, *err);
  }
  throw StructuredOutputExhausted(
      "structured output still invalid after " + std::to_string(1 + max_repairs) + " attempts",
      std::move(attempts));
}

nlohmann::json Gateway::complete_structured(Backend& backend, const Prompt& prompt,
                                            const nlohmann::json& schema, int max_repairs) {
  std::string raw = complete_with_repair(
      backend, prompt,
      [&schema](const std::string& attempt) -> std::optional<std::string> {
        auto parsed = extract_json(attempt);
        if (!parsed) return "response is not valid JSON";
        return validate_schema(*parsed, schema);
      },
      max_repairs);
  return *extract_json(raw);
}

nlohmann::json Gateway::complete_structured(Backend& backend, const Prompt& prompt,
                                            const nlohmann::json& schema) {
  return complete_structured(backend, prompt, schema, opts_.max_repairs);
}

}  // namespace chartattrib::llm
