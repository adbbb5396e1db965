#pragma once

#include <memory>
#include <string>

#include "chartattrib/llm/prompt.hpp"

namespace chartattrib::llm {

/// Completion port: text + images in, raw model text out. Implementations
/// must be safe to call from multiple threads.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string identity() const = 0;
  virtual bool supports_vision() const = 0;

  /// One raw completion. Throws TransportError / MockMiss / CacheMiss.
  virtual std::string complete_raw(const Prompt& prompt) = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

}  // namespace chartattrib::llm
