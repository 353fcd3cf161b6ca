#pragma once

#include <string>
#include <vector>

namespace ntrocr {

struct ManifestEntry {
  std::string image_path;     // as written in the manifest
  std::string resolved_path;  // relative paths resolved against the manifest
  std::string transcript;
  std::string language;  // "bn" | "ne"
  std::string split;     // "train" | "val" | "test"
};

// JSON-lines file, one object per entry with fields image_path, transcript,
// language, split. Every image is opened and parsed up front; errors carry
// the one-based manifest line number. Duplicate image paths are rejected.
// Transcripts may be empty only on test rows.
std::vector<ManifestEntry> load_manifest(const std::string& path);

std::vector<ManifestEntry> filter_split(
    const std::vector<ManifestEntry>& entries, const std::string& split);

}  // namespace ntrocr
