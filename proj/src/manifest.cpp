#include "ntrocr/manifest.hpp"

#include <json.hpp>

#include <set>
#include <sstream>

#include "ntrocr/errors.hpp"
#include "ntrocr/image.hpp"
#include "ntrocr/io.hpp"

namespace ntrocr {

namespace {

std::string dir_of(const std::string& path) {
  size_t slash = path.find_last_of('/');
  if (slash == std::string::npos) return "";
  return path.substr(0, slash);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ValidationError("manifest line " + std::to_string(line_no) + ": " +
                        what);
}

std::string get_string_field(const nlohmann::json& obj, const char* name,
                             int line_no) {
  if (!obj.contains(name)) {
    fail(line_no, std::string("missing field '") + name + "'");
  }
  if (!obj[name].is_string()) {
    fail(line_no, std::string("field '") + name + "' must be a string");
  }
  return obj[name].get<std::string>();
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::string text = read_file(path);
  std::string dir = dir_of(path);

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen_paths;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (blank) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail(line_no, "entry must be a JSON object");

    ManifestEntry entry;
    entry.image_path = get_string_field(obj, "image_path", line_no);
    entry.transcript = get_string_field(obj, "transcript", line_no);
    entry.language = get_string_field(obj, "language", line_no);
    entry.split = get_string_field(obj, "split", line_no);

    if (entry.image_path.empty()) fail(line_no, "empty image path");
    if (entry.language != "bn" && entry.language != "ne") {
      fail(line_no, "unknown language '" + entry.language + "'");
    }
    if (entry.split != "train" && entry.split != "val" &&
        entry.split != "test") {
      fail(line_no, "unknown split '" + entry.split + "'");
    }
    if (entry.transcript.empty() && entry.split != "test") {
      fail(line_no, "empty transcript on a " + entry.split + " row");
    }
    if (!seen_paths.insert(entry.image_path).second) {
      fail(line_no, "duplicate image path '" + entry.image_path + "'");
    }

    if (!entry.image_path.empty() && entry.image_path[0] == '/') {
      entry.resolved_path = entry.image_path;
    } else if (dir.empty()) {
      entry.resolved_path = entry.image_path;
    } else {
      entry.resolved_path = dir + "/" + entry.image_path;
    }

    try {
      load_pgm_file(entry.resolved_path);
    } catch (const std::exception& e) {
      fail(line_no, "unreadable image '" + entry.image_path +
                        "': " + e.what());
    }

    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<ManifestEntry> filter_split(
    const std::vector<ManifestEntry>& entries, const std::string& split) {
  std::vector<ManifestEntry> out;
  for (const ManifestEntry& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

}  // namespace ntrocr
