#pragma once

#include <string>
#include <variant>
#include <vector>

namespace chartattrib::llm {

/// Inline image payload (PNG bytes). The content hash stands in for the
/// bytes wherever a prompt needs a stable text rendering.
struct ImagePart {
  std::string png_bytes;
  std::string sha256;  // of png_bytes
};

struct TextPart {
  std::string text;
};

using PromptPart = std::variant<TextPart, ImagePart>;

struct Prompt {
  std::string system;
  std::vector<PromptPart> user_parts;
  double temperature = 0.0;
  int max_tokens = 2048;

  bool has_images() const;

  /// Stable text form: system + parts, images as "[image sha256=...]".
  /// Used for cache keys and mock matching.
  std::string rendered() const;
};

/// Builds an ImagePart, validating the bytes decode as a PNG.
ImagePart make_image_part(std::string png_bytes);

Prompt make_prompt(std::string system, std::vector<PromptPart> parts);

}  // namespace chartattrib::llm
