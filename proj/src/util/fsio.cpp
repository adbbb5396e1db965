#include "chartattrib/util/fsio.hpp"

#include <fstream>
#include <sstream>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::util {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw Error("read failed: " + path.string());
  return std::move(buf).str();
}

void write_file_atomic(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for write: " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out.good()) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace chartattrib::util
