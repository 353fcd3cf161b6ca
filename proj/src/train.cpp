#include "ntrocr/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include "ntrocr/checkpoint.hpp"
#include "ntrocr/errors.hpp"
#include "ntrocr/image.hpp"
#include "ntrocr/io.hpp"
#include "ntrocr/metrics.hpp"
#include "ntrocr/model.hpp"
#include "ntrocr/optim.hpp"
#include "ntrocr/rng.hpp"
#include "ntrocr/script.hpp"

namespace ntrocr {

namespace {

// stream tags for derive_seed: one independent stream per purpose
constexpr uint64_t kShuffleTag = 1;
constexpr uint64_t kAugmentTag = 2;

std::vector<Tensor*> param_ptrs(ModelParams& p) {
  std::vector<Tensor*> out;
  for_each_param(p, [&out](const std::string&, Tensor& t) {
    out.push_back(&t);
  });
  return out;
}

std::string render_metrics(const std::vector<EpochRow>& rows) {
  std::string csv = "epoch,loss,val_cer,val_wer\n";
  char buf[128];
  for (const EpochRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f\n", r.epoch, r.loss,
                  r.val_cer, r.val_wer);
    csv += buf;
  }
  return csv;
}

}  // namespace

TrainResult cmd_train(const RunConfig& cfg,
                      const std::vector<ManifestEntry>& entries,
                      const std::string& out_dir, std::ostream* progress) {
  validate_run_config(cfg);

  std::vector<ManifestEntry> train = filter_split(entries, "train");
  std::vector<ManifestEntry> val = filter_split(entries, "val");
  if (train.empty()) throw ValidationError("train split is empty");
  if (val.empty()) throw ValidationError("val split is empty");
  for (const ManifestEntry& e : entries) {
    if (e.split != "test" && e.language != cfg.language) {
      throw ValidationError("manifest language '" + e.language +
                            "' does not match config language '" +
                            cfg.language + "'");
    }
  }

  std::vector<std::string> corpus;
  for (const ManifestEntry& e : train) corpus.push_back(e.transcript);
  Vocab vocab = build_vocab(corpus);

  ModelConfig mc = model_config(cfg, vocab.size());
  validate_config(mc);

  auto load_resized = [&](const ManifestEntry& e) {
    GrayImage img = load_pgm_file(e.resolved_path);
    return resize_bilinear(img, cfg.image_size, cfg.image_size);
  };
  std::vector<GrayImage> train_imgs;
  std::vector<std::vector<int>> train_tokens;
  for (const ManifestEntry& e : train) {
    train_imgs.push_back(load_resized(e));
    std::vector<int> tokens = encode_text(e.transcript, vocab);
    if (static_cast<int>(tokens.size()) > cfg.max_len) {
      throw ValidationError("transcript of '" + e.image_path + "' needs " +
                            std::to_string(tokens.size()) +
                            " tokens but max_len is " +
                            std::to_string(cfg.max_len));
    }
    train_tokens.push_back(std::move(tokens));
  }
  std::vector<GrayImage> val_imgs;
  for (const ManifestEntry& e : val) val_imgs.push_back(load_resized(e));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("train: cannot create directory '" + out_dir +
                  "': " + ec.message());
  }

  TrainResult result;
  result.final_path = out_dir + "/checkpoint_final.ntrc";
  result.best_path = out_dir + "/checkpoint_best.ntrc";
  result.metrics_path = out_dir + "/metrics.csv";
  result.vocab_path = out_dir + "/vocab.txt";
  result.best_val_cer = std::numeric_limits<double>::infinity();

  ModelParams params = init_params(mc, cfg.seed);
  ModelParams last_good = params;

  AdamWHyper hyper;
  hyper.lr = cfg.lr;
  hyper.beta1 = cfg.beta1;
  hyper.beta2 = cfg.beta2;
  hyper.eps = cfg.eps;
  hyper.weight_decay = cfg.weight_decay;
  AdamW opt(param_ptrs(params), hyper);

  AugmentConfig aug = augment_config(cfg);
  const size_t n_train = train.size();

  for (int epoch = 1; epoch <= cfg.epochs && !result.diverged; ++epoch) {
    std::vector<size_t> order(n_train);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleTag,
                                static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (size_t start = 0; start < n_train && !result.diverged;
         start += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(n_train,
                            start + static_cast<size_t>(cfg.batch_size));
      ModelParams grad_sum = zeros_like_params(mc);
      std::vector<Tensor*> grad_tensors = param_ptrs(grad_sum);
      int batch_n = 0;

      for (size_t pos = start; pos < end; ++pos) {
        size_t j = order[pos];
        Rng aug_rng(derive_seed(cfg.seed, kAugmentTag,
                                static_cast<uint64_t>(epoch),
                                static_cast<uint64_t>(j)));
        GrayImage img = augment(train_imgs[j], aug, aug_rng);
        LossAndGrads lg =
            teacher_forced_loss_and_grads(img, train_tokens[j], mc, params);
        if (!std::isfinite(lg.loss)) {
          result.diverged = true;
          break;
        }
        loss_sum += lg.loss;
        std::vector<Tensor*> sample_grads = param_ptrs(lg.grads);
        for (size_t t = 0; t < grad_tensors.size(); ++t) {
          for (size_t v = 0; v < grad_tensors[t]->data.size(); ++v) {
            grad_tensors[t]->data[v] += sample_grads[t]->data[v];
          }
        }
        ++batch_n;
      }
      if (result.diverged) break;

      float inv = 1.0f / static_cast<float>(batch_n);
      for (Tensor* g : grad_tensors) {
        for (float& v : g->data) v *= inv;
      }
      opt.step(grad_tensors);
    }

    if (result.diverged) {
      params = last_good;
      break;
    }

    EpochRow row;
    row.epoch = epoch;
    row.loss = loss_sum / static_cast<double>(n_train);

    std::vector<EvalPair> pairs;
    for (size_t k = 0; k < val.size(); ++k) {
      std::vector<int> decoded = greedy_decode(val_imgs[k], mc, params);
      pairs.push_back(EvalPair{val[k].image_path, val[k].transcript,
                               decode_tokens(decoded, vocab)});
    }
    EvalReport report = accuracy_report(pairs);
    row.val_cer = report.micro_cer;
    row.val_wer = report.micro_wer;
    result.rows.push_back(row);

    if (progress) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "epoch %d loss %.6f val_cer %.6f val_wer %.6f\n",
                    row.epoch, row.loss, row.val_cer, row.val_wer);
      *progress << buf;
    }

    if (row.val_cer < result.best_val_cer) {
      result.best_val_cer = row.val_cer;
      result.best_epoch = epoch;
      save_checkpoint(result.best_path, cfg, vocab, params);
    }
    last_good = params;
  }

  save_checkpoint(result.final_path, cfg, vocab, params);
  if (result.best_epoch == 0) {
    // divergence before any completed epoch: keep a loadable best anyway
    save_checkpoint(result.best_path, cfg, vocab, params);
  }
  write_file(result.metrics_path, render_metrics(result.rows));
  write_file(result.vocab_path, vocab_dump(vocab));
  return result;
}

}  // namespace ntrocr
