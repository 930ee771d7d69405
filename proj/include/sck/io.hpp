#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sck/error.hpp"

namespace sck {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw structural_error("cannot open file " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Resolves `ref` against the directory containing `origin_file`.
inline std::string sibling_path(const std::string& origin_file, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(origin_file).parent_path() / p).string();
}

}  // namespace sck
