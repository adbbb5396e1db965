#pragma once

#include <filesystem>
#include <string>

namespace chartattrib::util {

/// Reads a whole file as bytes; throws chartattrib::Error on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

}  // namespace chartattrib::util
