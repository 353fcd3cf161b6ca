#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntrocr/rng.hpp"

namespace ntrocr {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, width*height

  uint8_t at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  uint8_t& at(int x, int y) {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  static GrayImage filled(int w, int h, uint8_t value);
};

// PGM P2 (ASCII) and P5 (binary), maxval <= 255, '#' comments.
// Parse failures throw ParseError naming the byte offset.
GrayImage load_pgm(const std::string& bytes);
GrayImage load_pgm_file(const std::string& path);

// Always emits P5 with maxval 255.
std::string write_pgm(const GrayImage& img);
void write_pgm_file(const std::string& path, const GrayImage& img);

// Half-pixel-center sampling: src = (dst + 0.5) * scale - 0.5, clamped.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

// Rotation about the image center, inverse mapping with bilinear sampling,
// out-of-bounds filled white. |angle_degrees| must be <= 45.
GrayImage rotate(const GrayImage& img, double angle_degrees);

GrayImage flip_horizontal(const GrayImage& img);

struct AugmentConfig {
  double flip_prob = 0.0;
  double rot_min = -5.0;
  double rot_max = 5.0;
  uint64_t seed = 0;
};

// Consumes exactly two draws in fixed order: flip decision, then angle.
GrayImage augment(const GrayImage& img, const AugmentConfig& cfg, Rng& rng);
GrayImage augment(const GrayImage& img, const AugmentConfig& cfg);

uint8_t rgb_to_gray(uint8_t r, uint8_t g, uint8_t b);

}  // namespace ntrocr
