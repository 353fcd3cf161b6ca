#pragma once

#include <string>

namespace ntrocr {

// Whole-file helpers. Both throw IoError on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace ntrocr
