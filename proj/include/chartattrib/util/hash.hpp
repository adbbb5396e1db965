#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chartattrib::util {

/// SHA-256 of arbitrary bytes, lowercase hex.
std::string sha256_hex(std::string_view data);

/// Base64 (RFC 4648, with padding) for embedding images in chat payloads.
std::string base64_encode(std::string_view data);

}  // namespace chartattrib::util
