#pragma once

#include <cstdint>
#include <vector>

#include "ntrocr/image.hpp"

namespace ntrocr {

// Half-open pixel rectangle: x in [x0, x1), y in [y0, y1).
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> ink;  // 1 = ink, 0 = background

  bool at(int x, int y) const {
    return ink[static_cast<size_t>(y) * width + x] != 0;
  }
};

enum class ProfileAxis { Rows, Columns };

struct ProjectionProfile {
  ProfileAxis axis = ProfileAxis::Rows;
  std::vector<int> counts;
};

struct MatraInfo {
  int row = 0;        // absolute row index
  double density = 0.0;  // ink fraction of the box width
};

// Ink = pixel < threshold. Threshold must lie in [0, 256).
BinaryImage binarize(const GrayImage& img, int threshold = 128);

ProjectionProfile projection_profile(const BinaryImage& bin, ProfileAxis axis);

// Maximal runs of rows holding >= min_ink ink pixels; runs separated by
// fewer than min_gap blank rows merge into one band. Each band is trimmed
// horizontally to its ink columns.
std::vector<BoundingBox> segment_lines(const BinaryImage& bin, int min_gap = 3,
                                       int min_ink = 1);

// Column runs with ink inside the line band, gaps < min_gap merged.
// Word boxes keep the line's vertical extent, ordered left to right.
std::vector<BoundingBox> segment_words(const BinaryImage& bin,
                                       const BoundingBox& line,
                                       int min_gap = 4);

// Densest row within the top 40% of the word box, ties to the topmost row.
MatraInfo detect_matra(const BinaryImage& bin, const BoundingBox& word);

}  // namespace ntrocr
