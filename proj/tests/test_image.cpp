#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ntrocr/errors.hpp"
#include "ntrocr/image.hpp"
#include "ntrocr/rng.hpp"

using namespace ntrocr;

namespace {

GrayImage random_image(Rng& rng, int w, int h) {
  GrayImage img = GrayImage::filled(w, h, 0);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.below(256));
  return img;
}

std::string p2_bytes(const GrayImage& img) {
  std::string out = "P2\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    out += std::to_string(img.pixels[i]);
    out += (i + 1) % 12 == 0 ? '\n' : ' ';
  }
  return out;
}

bool images_equal(const GrayImage& a, const GrayImage& b) {
  return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
}

}  // namespace

TEST_CASE("load_pgm minimal P5") {
  std::string bytes = "P5\n2 1\n255\n";
  bytes.push_back('\0');
  bytes.push_back('\xff');
  GrayImage img = load_pgm(bytes);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.pixels == std::vector<uint8_t>{0, 255});
}

TEST_CASE("P2 and P5 parse to the same image") {
  std::string p2 = "P2\n# tiny test image\n2 2\n255\n0 128\n64 255\n";
  std::string p5 = "P5\n2 2\n255\n";
  p5 += '\0';
  p5 += static_cast<char>(128);
  p5 += static_cast<char>(64);
  p5 += '\xff';
  CHECK(images_equal(load_pgm(p2), load_pgm(p5)));
}

TEST_CASE("pgm parse errors carry byte offsets") {
  CHECK_THROWS_AS(load_pgm("P6\n1 1\n255\nx"), ParseError);
  CHECK_THROWS_AS(load_pgm(""), ParseError);

  try {
    load_pgm("P5\n2 2\n255\nab");  // needs 4 raster bytes
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("truncated") != std::string::npos);
    CHECK(msg.find("byte") != std::string::npos);
  }

  try {
    load_pgm("P5\n1 1\n300\nx");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("maxval") != std::string::npos);
  }

  // P2 pixel above maxval
  CHECK_THROWS_AS(load_pgm("P2\n1 1\n10\n11\n"), ParseError);
  // missing dims
  CHECK_THROWS_AS(load_pgm("P2\n"), ParseError);
  CHECK_THROWS_AS(load_pgm("P5\n0 3\n255\n"), ParseError);
}

TEST_CASE("write then load round trips pixel-exact") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int w = 1 + static_cast<int>(rng.below(40));
    int h = 1 + static_cast<int>(rng.below(40));
    GrayImage img = random_image(rng, w, h);
    GrayImage back = load_pgm(write_pgm(img));
    CHECK(images_equal(img, back));
    // ASCII variant of the same pixels parses identically
    CHECK(images_equal(load_pgm(p2_bytes(img)), img));
  }
}

TEST_CASE("writer normalizes to P5") {
  GrayImage img = load_pgm("P2\n1 1\n255\n7\n");
  std::string bytes = write_pgm(img);
  CHECK(bytes.substr(0, 3) == "P5\n");
  CHECK(images_equal(load_pgm(bytes), img));
}

TEST_CASE("resize preserves constants and identity") {
  GrayImage img = GrayImage::filled(7, 5, 93);
  for (auto [w, h] : std::vector<std::pair<int, int>>{
           {1, 1}, {3, 9}, {14, 10}, {33, 2}}) {
    GrayImage out = resize_bilinear(img, w, h);
    CHECK(out.width == w);
    CHECK(out.height == h);
    for (uint8_t p : out.pixels) CHECK(p == 93);
  }

  Rng rng(3);
  GrayImage noisy = random_image(rng, 9, 6);
  CHECK(images_equal(resize_bilinear(noisy, 9, 6), noisy));

  CHECK_THROWS_AS(resize_bilinear(img, 0, 4), ValidationError);
}

TEST_CASE("bilinear 2x2 to 4x4 oracle") {
  GrayImage img = GrayImage::filled(2, 2, 0);
  img.at(1, 0) = 255;
  img.at(1, 1) = 255;
  GrayImage out = resize_bilinear(img, 4, 4);
  std::vector<uint8_t> expected_cols = {0, 64, 191, 255};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      CHECK(out.at(x, y) == expected_cols[x]);
    }
  }
}

TEST_CASE("rotate zero is bit-identical, bounds enforced") {
  Rng rng(17);
  GrayImage img = random_image(rng, 13, 9);
  CHECK(images_equal(rotate(img, 0.0), img));
  CHECK_THROWS_AS(rotate(img, 46.0), ValidationError);
  CHECK_THROWS_AS(rotate(img, -50.0), ValidationError);
  CHECK_THROWS_AS(rotate(img, std::nan("")), ValidationError);
}

TEST_CASE("rotating an all-white image stays all-white") {
  GrayImage img = GrayImage::filled(33, 17, 255);
  for (double a : {5.0, -5.0, 45.0, 0.5}) {
    GrayImage out = rotate(img, a);
    for (uint8_t p : out.pixels) CHECK(p == 255);
  }
}

TEST_CASE("rotate +5 then -5 approximately restores a band image") {
  // bands kept away from the borders so nothing rotates out of frame
  GrayImage img = GrayImage::filled(64, 64, 255);
  for (int band = 0; band < 3; ++band) {
    int y0 = 16 + band * 12;
    for (int y = y0; y < y0 + 4; ++y) {
      for (int x = 16; x < 48; ++x) img.at(x, y) = 0;
    }
  }
  GrayImage round = rotate(rotate(img, 5.0), -5.0);
  double abs_err = 0.0;
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    abs_err += std::abs(static_cast<int>(img.pixels[i]) -
                        static_cast<int>(round.pixels[i]));
  }
  double mae = abs_err / static_cast<double>(img.pixels.size());
  CHECK(mae < 8.0);
}

TEST_CASE("flip is an involution") {
  Rng rng(23);
  GrayImage img = random_image(rng, 10, 4);
  CHECK(images_equal(flip_horizontal(flip_horizontal(img)), img));

  GrayImage two = GrayImage::filled(2, 1, 0);
  two.at(1, 0) = 255;
  GrayImage flipped = flip_horizontal(two);
  CHECK(flipped.at(0, 0) == 255);
  CHECK(flipped.at(1, 0) == 0);

  GrayImage sym = GrayImage::filled(3, 2, 9);
  sym.at(1, 0) = 200;
  sym.at(1, 1) = 40;
  CHECK(images_equal(flip_horizontal(sym), sym));
}

TEST_CASE("augment identity and determinism") {
  Rng rng(31);
  GrayImage img = random_image(rng, 20, 12);

  AugmentConfig off;
  off.flip_prob = 0.0;
  off.rot_min = 0.0;
  off.rot_max = 0.0;
  off.seed = 99;
  CHECK(images_equal(augment(img, off), img));

  AugmentConfig cfg;
  cfg.flip_prob = 0.5;
  cfg.seed = 1234;
  GrayImage a = augment(img, cfg);
  GrayImage b = augment(img, cfg);
  CHECK(images_equal(a, b));
  cfg.seed = 1235;
  GrayImage c = augment(img, cfg);
  // A different seed draws a different angle; byte equality would be a fluke.
  CHECK_FALSE(images_equal(a, c));
}

TEST_CASE("augment consumes both draws regardless of outcomes") {
  GrayImage img = GrayImage::filled(8, 8, 255);
  AugmentConfig cfg;  // flip_prob 0 still burns the flip draw
  Rng used(5);
  augment(img, cfg, used);
  Rng control(5);
  control.uniform();
  control.uniform(cfg.rot_min, cfg.rot_max);
  CHECK(used.next_u64() == control.next_u64());
}

TEST_CASE("augment rejects bad config") {
  GrayImage img = GrayImage::filled(4, 4, 0);
  AugmentConfig cfg;
  cfg.flip_prob = 1.5;
  CHECK_THROWS_AS(augment(img, cfg), ValidationError);
  cfg.flip_prob = 0.0;
  cfg.rot_min = 3.0;
  cfg.rot_max = -3.0;
  CHECK_THROWS_AS(augment(img, cfg), ValidationError);
  cfg.rot_min = -90.0;
  cfg.rot_max = 0.0;
  CHECK_THROWS_AS(augment(img, cfg), ValidationError);
}

TEST_CASE("augment angle draws look uniform over the range") {
  // mirrors the documented draw order: flip decision first, then angle
  std::vector<int> bins(10, 0);
  int draws = 100;
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(7, static_cast<uint64_t>(i)));
    rng.uniform();
    double angle = rng.uniform(-5.0, 5.0);
    CHECK(angle >= -5.0);
    CHECK(angle < 5.0);
    int bin = static_cast<int>((angle + 5.0));
    if (bin > 9) bin = 9;
    ++bins[bin];
  }
  double expected = draws / 10.0;
  double chi2 = 0.0;
  for (int count : bins) {
    double d = count - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 21.666);  // 9 dof, p = 0.01
}

TEST_CASE("rgb to gray weights") {
  CHECK(rgb_to_gray(255, 255, 255) == 255);
  CHECK(rgb_to_gray(0, 0, 0) == 0);
  CHECK(rgb_to_gray(255, 0, 0) == 76);   // round(0.299*255)
  CHECK(rgb_to_gray(0, 255, 0) == 150);  // round(0.587*255)
  CHECK(rgb_to_gray(0, 0, 255) == 29);   // round(0.114*255)
}
