#include "ntrocr/segment.hpp"

#include <cmath>
#include <string>

#include "ntrocr/errors.hpp"

namespace ntrocr {

namespace {

void check_box(const BinaryImage& bin, const BoundingBox& box,
               const char* where) {
  if (box.x0 < 0 || box.y0 < 0 || box.x1 > bin.width || box.y1 > bin.height ||
      box.x0 >= box.x1 || box.y0 >= box.y1) {
    throw ValidationError(std::string(where) + ": invalid box [" +
                          std::to_string(box.x0) + "," + std::to_string(box.y0) +
                          "," + std::to_string(box.x1) + "," +
                          std::to_string(box.y1) + ")");
  }
}

struct Run {
  int begin;
  int end;  // half-open
};

// Indices with value >= min_ink form runs; gaps shorter than min_gap merge.
std::vector<Run> merged_runs(const std::vector<int>& counts, int min_gap,
                             int min_ink) {
  std::vector<Run> runs;
  int i = 0;
  int n = static_cast<int>(counts.size());
  while (i < n) {
    if (counts[i] < min_ink) {
      ++i;
      continue;
    }
    int start = i;
    while (i < n && counts[i] >= min_ink) ++i;
    if (!runs.empty() && start - runs.back().end < min_gap) {
      runs.back().end = i;
    } else {
      runs.push_back({start, i});
    }
  }
  return runs;
}

}  // namespace

BinaryImage binarize(const GrayImage& img, int threshold) {
  if (threshold < 0 || threshold > 255) {
    throw ValidationError("binarize: threshold " + std::to_string(threshold) +
                          " outside [0, 255]");
  }
  BinaryImage bin;
  bin.width = img.width;
  bin.height = img.height;
  bin.ink.resize(img.pixels.size());
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    bin.ink[i] = img.pixels[i] < threshold ? 1 : 0;
  }
  return bin;
}

ProjectionProfile projection_profile(const BinaryImage& bin,
                                     ProfileAxis axis) {
  if (bin.width < 1 || bin.height < 1) {
    throw ValidationError("projection_profile: empty image");
  }
  ProjectionProfile p;
  p.axis = axis;
  if (axis == ProfileAxis::Rows) {
    p.counts.assign(bin.height, 0);
    for (int y = 0; y < bin.height; ++y) {
      for (int x = 0; x < bin.width; ++x) p.counts[y] += bin.at(x, y);
    }
  } else {
    p.counts.assign(bin.width, 0);
    for (int y = 0; y < bin.height; ++y) {
      for (int x = 0; x < bin.width; ++x) p.counts[x] += bin.at(x, y);
    }
  }
  return p;
}

std::vector<BoundingBox> segment_lines(const BinaryImage& bin, int min_gap,
                                       int min_ink) {
  if (min_gap < 1) throw ValidationError("segment_lines: min_gap must be >= 1");
  if (min_ink < 1) throw ValidationError("segment_lines: min_ink must be >= 1");
  ProjectionProfile rows = projection_profile(bin, ProfileAxis::Rows);
  std::vector<BoundingBox> boxes;
  for (const Run& run : merged_runs(rows.counts, min_gap, min_ink)) {
    int x_min = bin.width;
    int x_max = -1;
    for (int y = run.begin; y < run.end; ++y) {
      for (int x = 0; x < bin.width; ++x) {
        if (bin.at(x, y)) {
          if (x < x_min) x_min = x;
          if (x > x_max) x_max = x;
        }
      }
    }
    boxes.push_back({x_min, run.begin, x_max + 1, run.end});
  }
  return boxes;
}

std::vector<BoundingBox> segment_words(const BinaryImage& bin,
                                       const BoundingBox& line, int min_gap) {
  check_box(bin, line, "segment_words");
  if (min_gap < 1) throw ValidationError("segment_words: min_gap must be >= 1");
  std::vector<int> counts(line.width(), 0);
  for (int y = line.y0; y < line.y1; ++y) {
    for (int x = line.x0; x < line.x1; ++x) {
      counts[x - line.x0] += bin.at(x, y);
    }
  }
  std::vector<BoundingBox> boxes;
  for (const Run& run : merged_runs(counts, min_gap, 1)) {
    boxes.push_back({line.x0 + run.begin, line.y0, line.x0 + run.end, line.y1});
  }
  return boxes;
}

MatraInfo detect_matra(const BinaryImage& bin, const BoundingBox& word) {
  check_box(bin, word, "detect_matra");
  bool any_ink = false;
  for (int y = word.y0; y < word.y1 && !any_ink; ++y) {
    for (int x = word.x0; x < word.x1; ++x) {
      if (bin.at(x, y)) {
        any_ink = true;
        break;
      }
    }
  }
  if (!any_ink) throw ValidationError("detect_matra: no ink in box");

  int search_rows = static_cast<int>(
      std::ceil(0.4 * static_cast<double>(word.height())));
  if (search_rows < 1) search_rows = 1;
  MatraInfo best;
  best.row = word.y0;
  best.density = -1.0;
  for (int y = word.y0; y < word.y0 + search_rows; ++y) {
    int count = 0;
    for (int x = word.x0; x < word.x1; ++x) count += bin.at(x, y);
    double density = static_cast<double>(count) / word.width();
    if (density > best.density) {  // strict: ties keep the topmost row
      best.row = y;
      best.density = density;
    }
  }
  return best;
}

}  // namespace ntrocr
