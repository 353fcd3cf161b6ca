#include "ntrocr/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "ntrocr/errors.hpp"
#include "ntrocr/io.hpp"

namespace ntrocr {

GrayImage GrayImage::filled(int w, int h, uint8_t value) {
  if (w < 1 || h < 1) {
    throw ValidationError("image dims must be positive, got " +
                          std::to_string(w) + "x" + std::to_string(h));
  }
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<size_t>(w) * h, value);
  return img;
}

namespace {

struct PgmReader {
  const std::string& bytes;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("pgm: " + what + " at byte " + std::to_string(pos));
  }

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      unsigned char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(c)) {
        ++pos;
      } else {
        break;
      }
    }
  }

  int read_int(const std::string& name, long max_value) {
    skip_space_and_comments();
    if (pos >= bytes.size()) fail("missing " + name);
    if (!std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      fail("expected " + name);
    }
    long value = 0;
    while (pos < bytes.size() &&
           std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > max_value) {
        fail(name + " " + std::to_string(value) + " exceeds " +
             std::to_string(max_value));
      }
      ++pos;
    }
    return static_cast<int>(value);
  }
};

}  // namespace

GrayImage load_pgm(const std::string& bytes) {
  PgmReader r{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '2' && bytes[1] != '5')) {
    r.fail("bad magic, want P2 or P5");
  }
  bool binary = bytes[1] == '5';
  r.pos = 2;

  GrayImage img;
  img.width = r.read_int("width", 1 << 20);
  img.height = r.read_int("height", 1 << 20);
  if (img.width < 1 || img.height < 1) r.fail("dims must be positive");
  int maxval = r.read_int("maxval", 255);
  if (maxval < 1) r.fail("maxval must be positive");

  size_t count = static_cast<size_t>(img.width) * img.height;
  img.pixels.resize(count);
  if (binary) {
    if (r.pos >= bytes.size() ||
        !std::isspace(static_cast<unsigned char>(bytes[r.pos]))) {
      r.fail("missing whitespace before raster");
    }
    ++r.pos;
    if (bytes.size() - r.pos < count) {
      r.pos = bytes.size();
      r.fail("truncated raster, need " + std::to_string(count) + " bytes");
    }
    std::copy_n(bytes.begin() + static_cast<long>(r.pos), count,
                img.pixels.begin());
  } else {
    for (size_t i = 0; i < count; ++i) {
      img.pixels[i] = static_cast<uint8_t>(r.read_int("pixel", maxval));
    }
  }
  return img;
}

GrayImage load_pgm_file(const std::string& path) {
  try {
    return load_pgm(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_pgm(const GrayImage& img) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != static_cast<size_t>(img.width) * img.height) {
    throw ValidationError("write_pgm: inconsistent image");
  }
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()),
             img.pixels.size());
  return out;
}

void write_pgm_file(const std::string& path, const GrayImage& img) {
  write_file(path, write_pgm(img));
}

namespace {

double clampd(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// src_x/src_y already clamped into the valid sample range.
uint8_t sample_bilinear(const GrayImage& img, double src_x, double src_y) {
  int x0 = static_cast<int>(std::floor(src_x));
  int y0 = static_cast<int>(std::floor(src_y));
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = src_x - x0;
  double fy = src_y - y0;
  double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  double bot = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  double v = (1.0 - fy) * top + fy * bot;
  return static_cast<uint8_t>(clampd(std::lround(v), 0.0, 255.0));
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw ValidationError("resize: output dims must be positive");
  }
  if (out_w == img.width && out_h == img.height) return img;
  GrayImage out = GrayImage::filled(out_w, out_h, 0);
  double scale_x = static_cast<double>(img.width) / out_w;
  double scale_y = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double src_y = clampd((y + 0.5) * scale_y - 0.5, 0.0, img.height - 1.0);
    for (int x = 0; x < out_w; ++x) {
      double src_x = clampd((x + 0.5) * scale_x - 0.5, 0.0, img.width - 1.0);
      out.at(x, y) = sample_bilinear(img, src_x, src_y);
    }
  }
  return out;
}

GrayImage rotate(const GrayImage& img, double angle_degrees) {
  if (!(std::abs(angle_degrees) <= 45.0)) {
    throw ValidationError("rotate: angle " + std::to_string(angle_degrees) +
                          " outside [-45, 45]");
  }
  if (angle_degrees == 0.0) return img;
  double rad = angle_degrees * std::numbers::pi / 180.0;
  double c = std::cos(rad);
  double s = std::sin(rad);
  double cx = (img.width - 1) / 2.0;
  double cy = (img.height - 1) / 2.0;
  GrayImage out = GrayImage::filled(img.width, img.height, 255);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double dx = x - cx;
      double dy = y - cy;
      double src_x = cx + c * dx + s * dy;
      double src_y = cy - s * dx + c * dy;
      if (src_x < 0.0 || src_x > img.width - 1.0 || src_y < 0.0 ||
          src_y > img.height - 1.0) {
        continue;  // white fill
      }
      out.at(x, y) = sample_bilinear(img, src_x, src_y);
    }
  }
  return out;
}

GrayImage flip_horizontal(const GrayImage& img) {
  GrayImage out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(x, y) = img.at(img.width - 1 - x, y);
    }
  }
  return out;
}

GrayImage augment(const GrayImage& img, const AugmentConfig& cfg, Rng& rng) {
  if (cfg.flip_prob < 0.0 || cfg.flip_prob > 1.0) {
    throw ValidationError("augment: flip_prob outside [0, 1]");
  }
  if (cfg.rot_min > cfg.rot_max) {
    throw ValidationError("augment: rot_min > rot_max");
  }
  if (cfg.rot_min < -45.0 || cfg.rot_max > 45.0) {
    throw ValidationError("augment: rotation range outside [-45, 45]");
  }
  // Fixed draw order so downstream consumption stays aligned.
  bool do_flip = rng.uniform() < cfg.flip_prob;
  double angle = rng.uniform(cfg.rot_min, cfg.rot_max);
  GrayImage out = do_flip ? flip_horizontal(img) : img;
  if (angle != 0.0) out = rotate(out, angle);
  return out;
}

GrayImage augment(const GrayImage& img, const AugmentConfig& cfg) {
  Rng rng(cfg.seed);
  return augment(img, cfg, rng);
}

uint8_t rgb_to_gray(uint8_t r, uint8_t g, uint8_t b) {
  double v = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<uint8_t>(clampd(std::lround(v), 0.0, 255.0));
}

}  // namespace ntrocr
