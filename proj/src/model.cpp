#include "ntrocr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ntrocr/errors.hpp"
#include "ntrocr/rng.hpp"
#include "ntrocr/script.hpp"

namespace ntrocr {

namespace {

constexpr float kLnEps = 1e-5f;

void accumulate(Tensor& x, const Tensor& y) {
  if (!x.same_shape(y)) {
    throw ValidationError("accumulate: shape mismatch " + shape_string(x) +
                          " vs " + shape_string(y));
  }
  for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += y.data[i];
}

Tensor slice_cols(const Tensor& x, int c0, int width) {
  Tensor out = Tensor::zeros({x.dim(0), width});
  for (int i = 0; i < x.dim(0); ++i) {
    for (int j = 0; j < width; ++j) out.at(i, j) = x.at(i, c0 + j);
  }
  return out;
}

void add_cols(Tensor& x, const Tensor& part, int c0) {
  for (int i = 0; i < part.dim(0); ++i) {
    for (int j = 0; j < part.dim(1); ++j) x.at(i, c0 + j) += part.at(i, j);
  }
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor out = matmul(x, w);
  for (int i = 0; i < out.dim(0); ++i) {
    for (int j = 0; j < out.dim(1); ++j) out.at(i, j) += b.at(j);
  }
  return out;
}

// Returns dx; accumulates weight and bias grads.
Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& g,
                       Tensor& grad_w, Tensor& grad_b) {
  Tensor dx = Tensor::zeros({x.dim(0), x.dim(1)});
  matmul_backward(x, w, g, dx, grad_w);
  for (int i = 0; i < g.dim(0); ++i) {
    for (int j = 0; j < g.dim(1); ++j) grad_b.at(j) += g.at(i, j);
  }
  return dx;
}

struct AttnCache {
  Tensor q, k, v;
  Tensor probs;  // [n_heads x Tq x Tk]
  Tensor ctx;
};

struct MlpCache {
  Tensor x_in, h1, act;
};

Tensor attention_forward(const Tensor& xq, const Tensor& xkv,
                         const AttnParams& w, int n_heads, bool causal,
                         AttnCache& cache, const std::string& where,
                         ForwardTrace* trace) {
  int d = xq.dim(1);
  int dh = d / n_heads;
  float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  cache.q = linear(xq, w.wq, w.bq);
  cache.k = linear(xkv, w.wk, w.bk);
  cache.v = linear(xkv, w.wv, w.bv);
  int tq = cache.q.dim(0);
  int tk = cache.k.dim(0);
  cache.probs = Tensor::zeros({n_heads, tq, tk});
  cache.ctx = Tensor::zeros({tq, d});
  const float neg_inf = -std::numeric_limits<float>::infinity();
  for (int h = 0; h < n_heads; ++h) {
    Tensor qh = slice_cols(cache.q, h * dh, dh);
    Tensor kh = slice_cols(cache.k, h * dh, dh);
    Tensor vh = slice_cols(cache.v, h * dh, dh);
    Tensor scores = matmul_nt(qh, kh);
    for (float& s : scores.data) s *= scale;
    if (causal) {
      for (int i = 0; i < tq; ++i) {
        for (int j = i + 1; j < tk; ++j) scores.at(i, j) = neg_inf;
      }
    }
    Tensor probs = softmax_lastdim(scores);
    Tensor ctx_h = matmul(probs, vh);
    for (int i = 0; i < tq; ++i) {
      for (int j = 0; j < tk; ++j) cache.probs.at(h, i, j) = probs.at(i, j);
    }
    add_cols(cache.ctx, ctx_h, h * dh);
  }
  if (trace) trace->attention.push_back({where, cache.probs});
  return linear(cache.ctx, w.wo, w.bo);
}

// Returns (dxq, dxkv); accumulates into gw. The zero probability the mask
// leaves at future positions makes their gradients exactly zero.
std::pair<Tensor, Tensor> attention_backward(const Tensor& g_out,
                                             const Tensor& xq,
                                             const Tensor& xkv,
                                             const AttnParams& w,
                                             AttnParams& gw, int n_heads,
                                             const AttnCache& cache) {
  int d = xq.dim(1);
  int dh = d / n_heads;
  float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  int tq = cache.q.dim(0);
  int tk = cache.k.dim(0);

  Tensor dctx = linear_backward(cache.ctx, w.wo, g_out, gw.wo, gw.bo);

  Tensor dq = Tensor::zeros({tq, d});
  Tensor dk = Tensor::zeros({tk, d});
  Tensor dv = Tensor::zeros({tk, d});
  for (int h = 0; h < n_heads; ++h) {
    Tensor qh = slice_cols(cache.q, h * dh, dh);
    Tensor kh = slice_cols(cache.k, h * dh, dh);
    Tensor vh = slice_cols(cache.v, h * dh, dh);
    Tensor dctx_h = slice_cols(dctx, h * dh, dh);
    Tensor probs_h = Tensor::zeros({tq, tk});
    for (int i = 0; i < tq; ++i) {
      for (int j = 0; j < tk; ++j) probs_h.at(i, j) = cache.probs.at(h, i, j);
    }
    Tensor dprobs = matmul_nt(dctx_h, vh);
    Tensor dvh = matmul_tn(probs_h, dctx_h);
    Tensor dscores = softmax_lastdim_backward(probs_h, dprobs);
    for (float& s : dscores.data) s *= scale;
    Tensor dqh = matmul(dscores, kh);
    Tensor dkh = matmul_tn(dscores, qh);
    add_cols(dq, dqh, h * dh);
    add_cols(dk, dkh, h * dh);
    add_cols(dv, dvh, h * dh);
  }
  Tensor dxq = linear_backward(xq, w.wq, dq, gw.wq, gw.bq);
  Tensor dxkv = linear_backward(xkv, w.wk, dk, gw.wk, gw.bk);
  Tensor dxv = linear_backward(xkv, w.wv, dv, gw.wv, gw.bv);
  accumulate(dxkv, dxv);
  return {std::move(dxq), std::move(dxkv)};
}

Tensor mlp_forward(const Tensor& x, const MlpParams& w, MlpCache& cache) {
  cache.x_in = x;
  cache.h1 = linear(x, w.w1, w.b1);
  cache.act = gelu(cache.h1);
  return linear(cache.act, w.w2, w.b2);
}

Tensor mlp_backward(const Tensor& g, const MlpParams& w, MlpParams& gw,
                    const MlpCache& cache) {
  Tensor dact = linear_backward(cache.act, w.w2, g, gw.w2, gw.b2);
  Tensor dh1 = gelu_backward(cache.h1, dact);
  return linear_backward(cache.x_in, w.w1, dh1, gw.w1, gw.b1);
}

struct EncBlockCache {
  Tensor x_in, ln1_out, x_mid, ln2_out;
  AttnCache attn;
  MlpCache mlp;
};

struct EncodeCache {
  Tensor patches, x0, final_in, out;
  std::vector<EncBlockCache> blocks;
};

struct DecBlockCache {
  Tensor x_in, ln1_out, x_mid1, ln2_out, x_mid2, ln3_out;
  AttnCache self_attn, cross_attn;
  MlpCache mlp;
};

struct DecodeCache {
  Tensor x0, final_in, ln_f_out;
  std::vector<DecBlockCache> blocks;
};

Tensor encode_forward(const GrayImage& img, const ModelConfig& cfg,
                      const ModelParams& p, EncodeCache& cache,
                      ForwardTrace* trace) {
  const EncoderConfig& e = cfg.encoder;
  if (img.width != e.image_size || img.height != e.image_size) {
    throw ValidationError("encoder expects " + std::to_string(e.image_size) +
                          "x" + std::to_string(e.image_size) + " input, got " +
                          std::to_string(img.width) + "x" +
                          std::to_string(img.height));
  }
  cache.patches = patchify(img, e.patch_size);
  Tensor tokens = linear(cache.patches, p.patch_w, p.patch_b);
  int rows = encoder_rows(e);
  cache.x0 = Tensor::zeros({rows, e.d_model});
  for (int j = 0; j < e.d_model; ++j) {
    cache.x0.at(0, j) = p.cls.at(j) + p.enc_pos.at(0, j);
  }
  for (int i = 1; i < rows; ++i) {
    for (int j = 0; j < e.d_model; ++j) {
      cache.x0.at(i, j) = tokens.at(i - 1, j) + p.enc_pos.at(i, j);
    }
  }
  Tensor x = cache.x0;
  cache.blocks.resize(static_cast<size_t>(e.n_layers));
  for (int l = 0; l < e.n_layers; ++l) {
    EncBlockCache& bc = cache.blocks[static_cast<size_t>(l)];
    const EncBlockParams& bp = p.enc_blocks[static_cast<size_t>(l)];
    bc.x_in = x;
    bc.ln1_out = layer_norm(x, bp.ln1.gamma, bp.ln1.beta, kLnEps);
    Tensor attn_out =
        attention_forward(bc.ln1_out, bc.ln1_out, bp.attn, e.n_heads, false,
                          bc.attn, "enc." + std::to_string(l) + ".self", trace);
    bc.x_mid = x;
    accumulate(bc.x_mid, attn_out);
    bc.ln2_out = layer_norm(bc.x_mid, bp.ln2.gamma, bp.ln2.beta, kLnEps);
    Tensor mlp_out = mlp_forward(bc.ln2_out, bp.mlp, bc.mlp);
    x = bc.x_mid;
    accumulate(x, mlp_out);
  }
  cache.final_in = x;
  return layer_norm(x, p.enc_ln_f.gamma, p.enc_ln_f.beta, kLnEps);
}

void encode_backward(const Tensor& g_out, const ModelConfig& cfg,
                     const ModelParams& p, ModelParams& g,
                     const EncodeCache& cache) {
  const EncoderConfig& e = cfg.encoder;
  Tensor dx = layer_norm_backward(cache.final_in, p.enc_ln_f.gamma, kLnEps,
                                  g_out, g.enc_ln_f.gamma, g.enc_ln_f.beta);
  for (int l = e.n_layers - 1; l >= 0; --l) {
    const EncBlockCache& bc = cache.blocks[static_cast<size_t>(l)];
    const EncBlockParams& bp = p.enc_blocks[static_cast<size_t>(l)];
    EncBlockParams& bg = g.enc_blocks[static_cast<size_t>(l)];

    Tensor dln2 = mlp_backward(dx, bp.mlp, bg.mlp, bc.mlp);
    Tensor dxmid = layer_norm_backward(bc.x_mid, bp.ln2.gamma, kLnEps, dln2,
                                       bg.ln2.gamma, bg.ln2.beta);
    accumulate(dxmid, dx);

    auto [dxq, dxkv] = attention_backward(dxmid, bc.ln1_out, bc.ln1_out,
                                          bp.attn, bg.attn, e.n_heads, bc.attn);
    accumulate(dxq, dxkv);
    Tensor dxin = layer_norm_backward(bc.x_in, bp.ln1.gamma, kLnEps, dxq,
                                      bg.ln1.gamma, bg.ln1.beta);
    accumulate(dxin, dxmid);
    dx = std::move(dxin);
  }
  int rows = encoder_rows(e);
  for (int j = 0; j < e.d_model; ++j) g.cls.at(j) += dx.at(0, j);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < e.d_model; ++j) g.enc_pos.at(i, j) += dx.at(i, j);
  }
  Tensor dtokens = Tensor::zeros({rows - 1, e.d_model});
  for (int i = 1; i < rows; ++i) {
    for (int j = 0; j < e.d_model; ++j) dtokens.at(i - 1, j) = dx.at(i, j);
  }
  linear_backward(cache.patches, p.patch_w, dtokens, g.patch_w, g.patch_b);
}

Tensor decode_forward(const std::vector<int>& tokens, const Tensor& enc_out,
                      const ModelConfig& cfg, const ModelParams& p,
                      DecodeCache& cache, ForwardTrace* trace) {
  const DecoderConfig& dcfg = cfg.decoder;
  int t = static_cast<int>(tokens.size());
  if (t < 1) throw ValidationError("decoder needs at least one token");
  if (t > dcfg.max_len) {
    throw ValidationError("sequence length " + std::to_string(t) +
                          " exceeds max_len " + std::to_string(dcfg.max_len));
  }
  for (int id : tokens) {
    if (id < 0 || id >= dcfg.vocab_size) {
      throw std::out_of_range("token id " + std::to_string(id) +
                              " outside vocab of " +
                              std::to_string(dcfg.vocab_size));
    }
  }
  if (enc_out.rank() != 2 || enc_out.dim(1) != dcfg.d_model) {
    throw ValidationError("encoder output " + shape_string(enc_out) +
                          " does not match d_model " +
                          std::to_string(dcfg.d_model));
  }
  cache.x0 = Tensor::zeros({t, dcfg.d_model});
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < dcfg.d_model; ++j) {
      cache.x0.at(i, j) = p.tok_emb.at(tokens[static_cast<size_t>(i)], j) +
                          p.dec_pos.at(i, j);
    }
  }
  Tensor x = cache.x0;
  cache.blocks.resize(static_cast<size_t>(dcfg.n_layers));
  for (int l = 0; l < dcfg.n_layers; ++l) {
    DecBlockCache& bc = cache.blocks[static_cast<size_t>(l)];
    const DecBlockParams& bp = p.dec_blocks[static_cast<size_t>(l)];
    std::string tag = "dec." + std::to_string(l);
    bc.x_in = x;
    bc.ln1_out = layer_norm(x, bp.ln1.gamma, bp.ln1.beta, kLnEps);
    Tensor self_out =
        attention_forward(bc.ln1_out, bc.ln1_out, bp.self_attn, dcfg.n_heads,
                          true, bc.self_attn, tag + ".self", trace);
    bc.x_mid1 = x;
    accumulate(bc.x_mid1, self_out);
    bc.ln2_out = layer_norm(bc.x_mid1, bp.ln2.gamma, bp.ln2.beta, kLnEps);
    Tensor cross_out =
        attention_forward(bc.ln2_out, enc_out, bp.cross_attn, dcfg.n_heads,
                          false, bc.cross_attn, tag + ".cross", trace);
    bc.x_mid2 = bc.x_mid1;
    accumulate(bc.x_mid2, cross_out);
    bc.ln3_out = layer_norm(bc.x_mid2, bp.ln3.gamma, bp.ln3.beta, kLnEps);
    Tensor mlp_out = mlp_forward(bc.ln3_out, bp.mlp, bc.mlp);
    x = bc.x_mid2;
    accumulate(x, mlp_out);
  }
  cache.final_in = x;
  cache.ln_f_out = layer_norm(x, p.dec_ln_f.gamma, p.dec_ln_f.beta, kLnEps);
  return linear(cache.ln_f_out, p.out_w, p.out_b);
}

// Accumulates parameter grads and the gradient w.r.t. enc_out.
void decode_backward(const Tensor& g_logits, const std::vector<int>& tokens,
                     const Tensor& enc_out, const ModelConfig& cfg,
                     const ModelParams& p, ModelParams& g,
                     const DecodeCache& cache, Tensor& grad_enc_out) {
  const DecoderConfig& dcfg = cfg.decoder;
  Tensor dln = linear_backward(cache.ln_f_out, p.out_w, g_logits, g.out_w,
                               g.out_b);
  Tensor dx = layer_norm_backward(cache.final_in, p.dec_ln_f.gamma, kLnEps,
                                  dln, g.dec_ln_f.gamma, g.dec_ln_f.beta);
  for (int l = dcfg.n_layers - 1; l >= 0; --l) {
    const DecBlockCache& bc = cache.blocks[static_cast<size_t>(l)];
    const DecBlockParams& bp = p.dec_blocks[static_cast<size_t>(l)];
    DecBlockParams& bg = g.dec_blocks[static_cast<size_t>(l)];

    Tensor dln3 = mlp_backward(dx, bp.mlp, bg.mlp, bc.mlp);
    Tensor dxmid2 = layer_norm_backward(bc.x_mid2, bp.ln3.gamma, kLnEps, dln3,
                                        bg.ln3.gamma, bg.ln3.beta);
    accumulate(dxmid2, dx);

    auto [dcross_q, denc] =
        attention_backward(dxmid2, bc.ln2_out, enc_out, bp.cross_attn,
                           bg.cross_attn, dcfg.n_heads, bc.cross_attn);
    accumulate(grad_enc_out, denc);
    Tensor dxmid1 = layer_norm_backward(bc.x_mid1, bp.ln2.gamma, kLnEps,
                                        dcross_q, bg.ln2.gamma, bg.ln2.beta);
    accumulate(dxmid1, dxmid2);

    auto [dself_q, dself_kv] =
        attention_backward(dxmid1, bc.ln1_out, bc.ln1_out, bp.self_attn,
                           bg.self_attn, dcfg.n_heads, bc.self_attn);
    accumulate(dself_q, dself_kv);
    Tensor dxin = layer_norm_backward(bc.x_in, bp.ln1.gamma, kLnEps, dself_q,
                                      bg.ln1.gamma, bg.ln1.beta);
    accumulate(dxin, dxmid1);
    dx = std::move(dxin);
  }
  int t = static_cast<int>(tokens.size());
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < dcfg.d_model; ++j) {
      g.tok_emb.at(tokens[static_cast<size_t>(i)], j) += dx.at(i, j);
      g.dec_pos.at(i, j) += dx.at(i, j);
    }
  }
}

// Splits BOS t1 .. tk EOS PAD* into decoder input and shifted targets.
std::pair<std::vector<int>, std::vector<int>> split_teacher_sequence(
    const std::vector<int>& tokens) {
  if (tokens.size() < 2) {
    throw ValidationError("token sequence needs at least BOS and EOS");
  }
  if (tokens.front() != kBosId) {
    throw ValidationError("token sequence must start with BOS");
  }
  auto eos = std::find(tokens.begin(), tokens.end(), kEosId);
  if (eos == tokens.end()) {
    throw ValidationError("token sequence has no EOS");
  }
  for (auto it = tokens.begin(); it != eos; ++it) {
    if (*it == kPadId) throw ValidationError("PAD appears before EOS");
  }
  for (auto it = eos + 1; it != tokens.end(); ++it) {
    if (*it != kPadId) throw ValidationError("non-PAD token after EOS");
  }
  std::vector<int> input(tokens.begin(), tokens.end() - 1);
  std::vector<int> targets(tokens.begin() + 1, tokens.end());
  return {std::move(input), std::move(targets)};
}

template <typename Params, typename Fn>
void visit_params(Params& p, Fn&& fn) {
  fn("patch_w", p.patch_w);
  fn("patch_b", p.patch_b);
  fn("cls", p.cls);
  fn("enc_pos", p.enc_pos);
  for (size_t l = 0; l < p.enc_blocks.size(); ++l) {
    auto& b = p.enc_blocks[l];
    std::string base = "enc." + std::to_string(l) + ".";
    fn(base + "ln1.gamma", b.ln1.gamma);
    fn(base + "ln1.beta", b.ln1.beta);
    fn(base + "attn.wq", b.attn.wq);
    fn(base + "attn.bq", b.attn.bq);
    fn(base + "attn.wk", b.attn.wk);
    fn(base + "attn.bk", b.attn.bk);
    fn(base + "attn.wv", b.attn.wv);
    fn(base + "attn.bv", b.attn.bv);
    fn(base + "attn.wo", b.attn.wo);
    fn(base + "attn.bo", b.attn.bo);
    fn(base + "ln2.gamma", b.ln2.gamma);
    fn(base + "ln2.beta", b.ln2.beta);
    fn(base + "mlp.w1", b.mlp.w1);
    fn(base + "mlp.b1", b.mlp.b1);
    fn(base + "mlp.w2", b.mlp.w2);
    fn(base + "mlp.b2", b.mlp.b2);
  }
  fn("enc_ln_f.gamma", p.enc_ln_f.gamma);
  fn("enc_ln_f.beta", p.enc_ln_f.beta);
  fn("tok_emb", p.tok_emb);
  fn("dec_pos", p.dec_pos);
  for (size_t l = 0; l < p.dec_blocks.size(); ++l) {
    auto& b = p.dec_blocks[l];
    std::string base = "dec." + std::to_string(l) + ".";
    fn(base + "ln1.gamma", b.ln1.gamma);
    fn(base + "ln1.beta", b.ln1.beta);
    fn(base + "self.wq", b.self_attn.wq);
    fn(base + "self.bq", b.self_attn.bq);
    fn(base + "self.wk", b.self_attn.wk);
    fn(base + "self.bk", b.self_attn.bk);
    fn(base + "self.wv", b.self_attn.wv);
    fn(base + "self.bv", b.self_attn.bv);
    fn(base + "self.wo", b.self_attn.wo);
    fn(base + "self.bo", b.self_attn.bo);
    fn(base + "ln2.gamma", b.ln2.gamma);
    fn(base + "ln2.beta", b.ln2.beta);
    fn(base + "cross.wq", b.cross_attn.wq);
    fn(base + "cross.bq", b.cross_attn.bq);
    fn(base + "cross.wk", b.cross_attn.wk);
    fn(base + "cross.bk", b.cross_attn.bk);
    fn(base + "cross.wv", b.cross_attn.wv);
    fn(base + "cross.bv", b.cross_attn.bv);
    fn(base + "cross.wo", b.cross_attn.wo);
    fn(base + "cross.bo", b.cross_attn.bo);
    fn(base + "ln3.gamma", b.ln3.gamma);
    fn(base + "ln3.beta", b.ln3.beta);
    fn(base + "mlp.w1", b.mlp.w1);
    fn(base + "mlp.b1", b.mlp.b1);
    fn(base + "mlp.w2", b.mlp.w2);
    fn(base + "mlp.b2", b.mlp.b2);
  }
  fn("dec_ln_f.gamma", p.dec_ln_f.gamma);
  fn("dec_ln_f.beta", p.dec_ln_f.beta);
  fn("out_w", p.out_w);
  fn("out_b", p.out_b);
}

AttnParams zero_attn(int d) {
  AttnParams a;
  a.wq = Tensor::zeros({d, d});
  a.bq = Tensor::zeros({d});
  a.wk = Tensor::zeros({d, d});
  a.bk = Tensor::zeros({d});
  a.wv = Tensor::zeros({d, d});
  a.bv = Tensor::zeros({d});
  a.wo = Tensor::zeros({d, d});
  a.bo = Tensor::zeros({d});
  return a;
}

MlpParams zero_mlp(int d, int ratio) {
  MlpParams m;
  m.w1 = Tensor::zeros({d, d * ratio});
  m.b1 = Tensor::zeros({d * ratio});
  m.w2 = Tensor::zeros({d * ratio, d});
  m.b2 = Tensor::zeros({d});
  return m;
}

LnParams zero_ln(int d) {
  return {Tensor::zeros({d}), Tensor::zeros({d})};
}

}  // namespace

void validate_config(const ModelConfig& cfg) {
  const EncoderConfig& e = cfg.encoder;
  const DecoderConfig& d = cfg.decoder;
  if (e.patch_size < 1 || e.image_size < e.patch_size) {
    throw ValidationError("bad image_size/patch_size");
  }
  if (e.image_size % e.patch_size != 0) {
    throw ValidationError("image_size " + std::to_string(e.image_size) +
                          " not divisible by patch_size " +
                          std::to_string(e.patch_size));
  }
  if (e.d_model < 1 || e.n_heads < 1 || e.d_model % e.n_heads != 0) {
    throw ValidationError("encoder d_model must be a positive multiple of n_heads");
  }
  if (e.n_layers < 1 || e.mlp_ratio < 1) {
    throw ValidationError("encoder layers and mlp_ratio must be positive");
  }
  if (d.d_model != e.d_model) {
    throw ValidationError("encoder and decoder d_model must match");
  }
  if (d.n_heads < 1 || d.d_model % d.n_heads != 0) {
    throw ValidationError("decoder d_model must be a positive multiple of n_heads");
  }
  if (d.vocab_size < 4) {
    throw ValidationError("vocab_size must cover the 4 special tokens");
  }
  if (d.max_len < 2 || d.n_layers < 1 || d.mlp_ratio < 1) {
    throw ValidationError("decoder max_len/layers/mlp_ratio too small");
  }
}

int encoder_rows(const EncoderConfig& cfg) {
  int grid = cfg.image_size / cfg.patch_size;
  return grid * grid + 1;
}

void for_each_param(
    ModelParams& p,
    const std::function<void(const std::string&, Tensor&)>& fn) {
  visit_params(p, fn);
}

void for_each_param(
    const ModelParams& p,
    const std::function<void(const std::string&, const Tensor&)>& fn) {
  visit_params(p, fn);
}

ModelParams zeros_like_params(const ModelConfig& cfg) {
  validate_config(cfg);
  const EncoderConfig& e = cfg.encoder;
  const DecoderConfig& d = cfg.decoder;
  ModelParams p;
  p.patch_w = Tensor::zeros({e.patch_size * e.patch_size, e.d_model});
  p.patch_b = Tensor::zeros({e.d_model});
  p.cls = Tensor::zeros({e.d_model});
  p.enc_pos = Tensor::zeros({encoder_rows(e), e.d_model});
  p.enc_blocks.resize(static_cast<size_t>(e.n_layers));
  for (auto& b : p.enc_blocks) {
    b.ln1 = zero_ln(e.d_model);
    b.attn = zero_attn(e.d_model);
    b.ln2 = zero_ln(e.d_model);
    b.mlp = zero_mlp(e.d_model, e.mlp_ratio);
  }
  p.enc_ln_f = zero_ln(e.d_model);
  p.tok_emb = Tensor::zeros({d.vocab_size, d.d_model});
  p.dec_pos = Tensor::zeros({d.max_len, d.d_model});
  p.dec_blocks.resize(static_cast<size_t>(d.n_layers));
  for (auto& b : p.dec_blocks) {
    b.ln1 = zero_ln(d.d_model);
    b.self_attn = zero_attn(d.d_model);
    b.ln2 = zero_ln(d.d_model);
    b.cross_attn = zero_attn(d.d_model);
    b.ln3 = zero_ln(d.d_model);
    b.mlp = zero_mlp(d.d_model, d.mlp_ratio);
  }
  p.dec_ln_f = zero_ln(d.d_model);
  p.out_w = Tensor::zeros({d.d_model, d.vocab_size});
  p.out_b = Tensor::zeros({d.vocab_size});
  return p;
}

ModelParams init_params(const ModelConfig& cfg, uint64_t seed) {
  ModelParams p = zeros_like_params(cfg);
  Rng rng(seed);
  for_each_param(p, [&rng](const std::string& name, Tensor& t) {
    if (name.ends_with("gamma")) {
      for (float& v : t.data) v = 1.0f;
    } else if (t.rank() == 2) {
      float limit = std::sqrt(6.0f / static_cast<float>(t.dim(0) + t.dim(1)));
      for (float& v : t.data) v = rng.uniform_f(-limit, limit);
    } else if (name == "cls") {
      float limit = std::sqrt(6.0f / static_cast<float>(1 + t.dim(0)));
      for (float& v : t.data) v = rng.uniform_f(-limit, limit);
    }
    // biases and layer-norm shifts stay zero
  });
  return p;
}

Tensor patchify(const GrayImage& img, int patch_size) {
  if (patch_size < 1) throw ValidationError("patchify: patch_size must be positive");
  if (img.width != img.height) {
    throw ValidationError("patchify: image must be square, got " +
                          std::to_string(img.width) + "x" +
                          std::to_string(img.height));
  }
  if (img.width % patch_size != 0) {
    throw ValidationError("patchify: size " + std::to_string(img.width) +
                          " not divisible by patch " +
                          std::to_string(patch_size));
  }
  int grid = img.width / patch_size;
  Tensor out = Tensor::zeros({grid * grid, patch_size * patch_size});
  for (int gy = 0; gy < grid; ++gy) {
    for (int gx = 0; gx < grid; ++gx) {
      int row = gy * grid + gx;
      for (int py = 0; py < patch_size; ++py) {
        for (int px = 0; px < patch_size; ++px) {
          out.at(row, py * patch_size + px) =
              static_cast<float>(
                  img.at(gx * patch_size + px, gy * patch_size + py)) /
              255.0f;
        }
      }
    }
  }
  return out;
}

Tensor encode_image(const GrayImage& img, const ModelConfig& cfg,
                    const ModelParams& params, ForwardTrace* trace) {
  EncodeCache cache;
  return encode_forward(img, cfg, params, cache, trace);
}

Tensor decoder_forward(const std::vector<int>& tokens, const Tensor& enc_out,
                       const ModelConfig& cfg, const ModelParams& params,
                       ForwardTrace* trace) {
  DecodeCache cache;
  return decode_forward(tokens, enc_out, cfg, params, cache, trace);
}

double teacher_forced_loss(const GrayImage& img,
                           const std::vector<int>& tokens,
                           const ModelConfig& cfg, const ModelParams& params) {
  auto [input, targets] = split_teacher_sequence(tokens);
  Tensor enc_out = encode_image(img, cfg, params);
  Tensor logits = decoder_forward(input, enc_out, cfg, params);
  return cross_entropy(logits, targets, kPadId).loss;
}

LossAndGrads teacher_forced_loss_and_grads(const GrayImage& img,
                                           const std::vector<int>& tokens,
                                           const ModelConfig& cfg,
                                           const ModelParams& params) {
  auto [input, targets] = split_teacher_sequence(tokens);
  EncodeCache ec;
  Tensor enc_out = encode_forward(img, cfg, params, ec, nullptr);
  DecodeCache dc;
  Tensor logits = decode_forward(input, enc_out, cfg, params, dc, nullptr);
  CrossEntropyResult ce = cross_entropy(logits, targets, kPadId);

  LossAndGrads result;
  result.loss = ce.loss;
  result.grads = zeros_like_params(cfg);
  Tensor grad_enc = Tensor::zeros({enc_out.dim(0), enc_out.dim(1)});
  decode_backward(ce.dlogits, input, enc_out, cfg, params, result.grads, dc,
                  grad_enc);
  encode_backward(grad_enc, cfg, params, result.grads, ec);
  return result;
}

std::vector<int> greedy_decode(const Tensor& enc_out, const ModelConfig& cfg,
                               const ModelParams& params) {
  std::vector<int> seq{kBosId};
  while (static_cast<int>(seq.size()) < cfg.decoder.max_len) {
    Tensor logits = decoder_forward(seq, enc_out, cfg, params);
    int last = logits.dim(0) - 1;
    int best = 0;
    float best_value = logits.at(last, 0);
    for (int v = 1; v < cfg.decoder.vocab_size; ++v) {
      if (logits.at(last, v) > best_value) {
        best = v;
        best_value = logits.at(last, v);
      }
    }
    seq.push_back(best);
    if (best == kEosId) break;
  }
  return seq;
}

std::vector<int> greedy_decode(const GrayImage& img, const ModelConfig& cfg,
                               const ModelParams& params) {
  return greedy_decode(encode_image(img, cfg, params), cfg, params);
}

}  // namespace ntrocr
