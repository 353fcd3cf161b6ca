#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ntrocr/config.hpp"
#include "ntrocr/manifest.hpp"

namespace ntrocr {

struct EpochRow {
  int epoch = 0;
  double loss = 0.0;
  double val_cer = 0.0;
  double val_wer = 0.0;
};

struct TrainResult {
  std::vector<EpochRow> rows;
  std::string final_path;
  std::string best_path;
  std::string metrics_path;
  std::string vocab_path;
  int best_epoch = 0;
  double best_val_cer = 0.0;
  bool diverged = false;
};

// Full training run: seeded init, per-epoch seeded shuffle + augmentation,
// teacher-forced batches with averaged gradients, one greedy-decoded
// validation pass per epoch. Writes checkpoint_final.ntrc,
// checkpoint_best.ntrc (strictly best validation CER), metrics.csv
// (header epoch,loss,val_cer,val_wer) and vocab.txt into out_dir, nothing
// elsewhere. A non-finite loss aborts the run and keeps the checkpoint of
// the last completed epoch. Deterministic: an epochs=k run matches the
// first k epochs of a longer run with the same seed.
TrainResult cmd_train(const RunConfig& cfg,
                      const std::vector<ManifestEntry>& entries,
                      const std::string& out_dir,
                      std::ostream* progress = nullptr);

}  // namespace ntrocr
