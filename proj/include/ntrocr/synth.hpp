#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ntrocr/image.hpp"
#include "ntrocr/segment.hpp"

namespace ntrocr {

struct SynthWord {
  BoundingBox box;  // bar plus glyph rows, trimmed to the stamped columns
  int bar_row = 0;  // top row of the two-row headline bar
  int symbol_count = 0;
};

struct SynthSample {
  std::string file_name;  // relative to the output directory
  std::string transcript;
  std::string split;  // train | val | test
  BoundingBox line_box;
  std::vector<SynthWord> words;
};

struct SynthOptions {
  int n_samples = 32;
  uint64_t seed = 42;
  int image_size = 384;
  std::string language = "bn";  // picks the transcript symbol set
};

// The ten grapheme clusters a generated symbol index maps to.
const std::vector<std::string>& synth_symbols(const std::string& language);

// Deterministic 12x12 glyph bitmap for one symbol index; every row carries
// ink so a stamped line is one contiguous band.
const std::vector<uint8_t>& synth_glyph(int symbol);

// Writes img_NNNN.pgm files plus manifest.jsonl into out_dir and returns
// the stamped ground truth. Each sample is one text line of 1-4 words of
// 1-5 symbols on a white canvas, every word capped by a solid headline bar,
// inter-word gaps of at least 8 columns; words that would overflow the
// canvas are dropped (at least one symbol always fits). Samples are split
// train/val/test 80/10/10 by index. Byte-deterministic for a fixed seed.
std::vector<SynthSample> synth_dataset(const std::string& out_dir,
                                       const SynthOptions& opt);

}  // namespace ntrocr
