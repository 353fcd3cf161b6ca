#pragma once

#include <cstdint>
#include <string>

#include "ntrocr/image.hpp"
#include "ntrocr/model.hpp"

namespace ntrocr {

/// One training/evaluation run, as read from a key=value config file.
/// Field names double as the config keys.
struct RunConfig {
  int image_size = 384;
  int patch_size = 16;
  int d_model = 64;
  int n_heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int mlp_ratio = 4;
  int max_len = 32;
  int epochs = 200;
  int batch_size = 4;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double flip_prob = 0.0;
  double rot_min = -5.0;
  double rot_max = 5.0;
  uint64_t seed = 42;
  std::string language = "bn";  // "bn" | "ne"
};

// Flat key=value lines; '#' starts a comment, blank lines are skipped.
// Unknown or duplicate keys and unparsable values are errors.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Emits every key in declaration order; parse(serialize(c)) == c,
// floats via %.17g so values survive the round trip exactly.
std::string serialize_config(const RunConfig& cfg);

void validate_run_config(const RunConfig& cfg);

ModelConfig model_config(const RunConfig& cfg, int vocab_size);
AugmentConfig augment_config(const RunConfig& cfg);

}  // namespace ntrocr
