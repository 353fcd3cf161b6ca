#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ntrocr/image.hpp"
#include "ntrocr/tensor.hpp"

namespace ntrocr {

struct EncoderConfig {
  int image_size = 384;
  int patch_size = 16;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int mlp_ratio = 4;
};

struct DecoderConfig {
  int vocab_size = 4;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int max_len = 32;
  int mlp_ratio = 4;
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;
};

void validate_config(const ModelConfig& cfg);

// 1 + (image_size / patch_size)^2: CLS row plus one row per patch.
int encoder_rows(const EncoderConfig& cfg);

struct LnParams {
  Tensor gamma;
  Tensor beta;
};

struct AttnParams {
  Tensor wq, bq;
  Tensor wk, bk;
  Tensor wv, bv;
  Tensor wo, bo;
};

struct MlpParams {
  Tensor w1, b1;
  Tensor w2, b2;
};

struct EncBlockParams {
  LnParams ln1;
  AttnParams attn;
  LnParams ln2;
  MlpParams mlp;
};

struct DecBlockParams {
  LnParams ln1;
  AttnParams self_attn;
  LnParams ln2;
  AttnParams cross_attn;
  LnParams ln3;
  MlpParams mlp;
};

struct ModelParams {
  Tensor patch_w;  // [patch_size^2 x d_model]
  Tensor patch_b;  // [d_model]
  Tensor cls;      // [d_model]
  Tensor enc_pos;  // [encoder_rows x d_model]
  std::vector<EncBlockParams> enc_blocks;
  LnParams enc_ln_f;
  Tensor tok_emb;  // [vocab_size x d_model]
  Tensor dec_pos;  // [max_len x d_model]
  std::vector<DecBlockParams> dec_blocks;
  LnParams dec_ln_f;
  Tensor out_w;  // [d_model x vocab_size]
  Tensor out_b;  // [vocab_size]
};

// Visits every tensor in a fixed, documented order with a dotted path name.
// The order defines checkpoint layout and optimizer slot assignment.
void for_each_param(ModelParams& p,
                    const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_param(
    const ModelParams& p,
    const std::function<void(const std::string&, const Tensor&)>& fn);

// Xavier-uniform weights, zero biases, unit layer-norm gains; one RNG stream
// consumed in visitation order so a seed pins every value.
ModelParams init_params(const ModelConfig& cfg, uint64_t seed);
ModelParams zeros_like_params(const ModelConfig& cfg);

struct AttnRecord {
  std::string where;  // e.g. "enc.0.self", "dec.1.cross"
  Tensor probs;       // [n_heads x Tq x Tk]
};

struct ForwardTrace {
  std::vector<AttnRecord> attention;
};

// Rows ordered row-major by grid cell; each row is one patch's raster scan
// of pixels normalized to [0, 1].
Tensor patchify(const GrayImage& img, int patch_size);

Tensor encode_image(const GrayImage& img, const ModelConfig& cfg,
                    const ModelParams& params, ForwardTrace* trace = nullptr);

// Causal self-attention over the token prefix plus cross-attention over
// encoder rows. Logits at position t depend only on tokens[0..t].
Tensor decoder_forward(const std::vector<int>& tokens, const Tensor& enc_out,
                       const ModelConfig& cfg, const ModelParams& params,
                       ForwardTrace* trace = nullptr);

// tokens must be BOS ... EOS with only PAD after the EOS.
double teacher_forced_loss(const GrayImage& img, const std::vector<int>& tokens,
                           const ModelConfig& cfg, const ModelParams& params);

struct LossAndGrads {
  double loss = 0.0;
  ModelParams grads;
};

LossAndGrads teacher_forced_loss_and_grads(const GrayImage& img,
                                           const std::vector<int>& tokens,
                                           const ModelConfig& cfg,
                                           const ModelParams& params);

// Argmax continuation from BOS until EOS or max_len; ties pick the lowest id.
std::vector<int> greedy_decode(const Tensor& enc_out, const ModelConfig& cfg,
                               const ModelParams& params);
std::vector<int> greedy_decode(const GrayImage& img, const ModelConfig& cfg,
                               const ModelParams& params);

}  // namespace ntrocr
