#include "ntrocr/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "ntrocr/errors.hpp"
#include "ntrocr/io.hpp"
#include "ntrocr/rng.hpp"
#include "ntrocr/script.hpp"

namespace ntrocr {

namespace {

constexpr int kGlyph = 12;
constexpr int kBarRows = 2;
constexpr int kWordHeight = kBarRows + kGlyph;
constexpr int kMargin = 4;
constexpr int kSymbolCount = 10;
constexpr int kMinGapCols = 8;
constexpr int kMaxGapCols = 14;

std::vector<std::string> consonant_run(uint32_t first) {
  std::vector<std::string> out;
  for (int i = 0; i < kSymbolCount; ++i) {
    out.push_back(encode_utf8(first + static_cast<uint32_t>(i)));
  }
  return out;
}

std::vector<uint8_t> make_glyph(int symbol) {
  Rng rng(derive_seed(0x617C9, static_cast<uint64_t>(symbol)));
  std::vector<uint8_t> cells(kGlyph * kGlyph, 0);
  for (auto& c : cells) c = rng.uniform() < 0.45 ? 1 : 0;
  // ink in every row keeps a stamped line one contiguous band
  for (int y = 0; y < kGlyph; ++y) {
    bool has_ink = false;
    for (int x = 0; x < kGlyph; ++x) has_ink = has_ink || cells[y * kGlyph + x];
    if (!has_ink) cells[y * kGlyph + rng.below(kGlyph)] = 1;
  }
  cells[symbol] = 1;  // top row differs across all ten symbols
  return cells;
}

std::string split_name(int index, int n) {
  int train_end = (4 * n + 4) / 5;       // ceil(0.8 n)
  int val_end = (9 * n + 9) / 10;        // ceil(0.9 n)
  if (index < train_end) return "train";
  if (index < val_end) return "val";
  return "test";
}

}  // namespace

const std::vector<std::string>& synth_symbols(const std::string& language) {
  static const std::vector<std::string> bengali = consonant_run(0x0995);
  static const std::vector<std::string> devanagari = consonant_run(0x0915);
  if (language == "bn") return bengali;
  if (language == "ne") return devanagari;
  throw ValidationError("synth: language must be 'bn' or 'ne'");
}

const std::vector<uint8_t>& synth_glyph(int symbol) {
  static const std::vector<std::vector<uint8_t>> glyphs = [] {
    std::vector<std::vector<uint8_t>> all;
    for (int s = 0; s < kSymbolCount; ++s) all.push_back(make_glyph(s));
    return all;
  }();
  if (symbol < 0 || symbol >= kSymbolCount) {
    throw ValidationError("synth: symbol index out of range");
  }
  return glyphs[static_cast<size_t>(symbol)];
}

std::vector<SynthSample> synth_dataset(const std::string& out_dir,
                                       const SynthOptions& opt) {
  if (opt.n_samples < 1) throw ValidationError("synth: n_samples must be >= 1");
  if (opt.image_size < kGlyph + 2 * kMargin) {
    throw ValidationError("synth: image_size too small for one symbol");
  }
  const std::vector<std::string>& symbols = synth_symbols(opt.language);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("synth: cannot create directory '" + out_dir +
                  "': " + ec.message());
  }

  const int size = opt.image_size;
  const int limit = size - kMargin;
  std::vector<SynthSample> samples;
  std::string manifest;

  for (int i = 0; i < opt.n_samples; ++i) {
    Rng rng(derive_seed(opt.seed, 11, static_cast<uint64_t>(i)));
    int n_words = 1 + static_cast<int>(rng.below(4));
    std::vector<int> counts(n_words);
    for (int& c : counts) c = 1 + static_cast<int>(rng.below(5));
    int y0 = kMargin + static_cast<int>(rng.below(
                           static_cast<uint64_t>(size - kWordHeight -
                                                 2 * kMargin + 1)));

    // clamp the first word to the canvas; drop words that overflow
    counts[0] = std::min(counts[0], (size - 2 * kMargin) / kGlyph);

    GrayImage img = GrayImage::filled(size, size, 255);
    SynthSample sample;
    char name_buf[32];
    std::snprintf(name_buf, sizeof(name_buf), "img_%04d.pgm", i);
    sample.file_name = name_buf;
    sample.split = split_name(i, opt.n_samples);

    int x = kMargin;
    std::vector<std::string> word_texts;
    for (int w = 0; w < n_words; ++w) {
      int width = counts[w] * kGlyph;
      if (w > 0) {
        int gap = kMinGapCols +
                  static_cast<int>(rng.below(kMaxGapCols - kMinGapCols + 1));
        if (x + gap + width > limit) break;
        x += gap;
      }

      for (int bx = 0; bx < width; ++bx) {
        img.at(x + bx, y0) = 0;
        img.at(x + bx, y0 + 1) = 0;
      }
      std::string text;
      for (int s = 0; s < counts[w]; ++s) {
        int symbol = static_cast<int>(rng.below(kSymbolCount));
        text += symbols[static_cast<size_t>(symbol)];
        const std::vector<uint8_t>& glyph = synth_glyph(symbol);
        for (int gy = 0; gy < kGlyph; ++gy) {
          for (int gx = 0; gx < kGlyph; ++gx) {
            if (glyph[gy * kGlyph + gx]) {
              img.at(x + s * kGlyph + gx, y0 + kBarRows + gy) = 0;
            }
          }
        }
      }
      word_texts.push_back(text);

      SynthWord word;
      word.box = BoundingBox{x, y0, x + width, y0 + kWordHeight};
      word.bar_row = y0;
      word.symbol_count = counts[w];
      sample.words.push_back(word);
      x += width;
    }

    for (size_t w = 0; w < word_texts.size(); ++w) {
      if (w > 0) sample.transcript += " ";
      sample.transcript += word_texts[w];
    }
    sample.line_box = BoundingBox{sample.words.front().box.x0, y0,
                                  sample.words.back().box.x1,
                                  y0 + kWordHeight};

    write_pgm_file(out_dir + "/" + sample.file_name, img);

    nlohmann::json row = {{"image_path", sample.file_name},
                          {"transcript", sample.transcript},
                          {"language", opt.language},
                          {"split", sample.split}};
    manifest += row.dump();
    manifest += "\n";
    samples.push_back(std::move(sample));
  }

  write_file(out_dir + "/manifest.jsonl", manifest);
  return samples;
}

}  // namespace ntrocr
