#pragma once

#include <vector>

#include "ntrocr/tensor.hpp"

namespace ntrocr {

struct AdamWHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Per-parameter moment estimates. step counts completed updates.
struct AdamWState {
  long step = 0;
  Tensor m;
  Tensor v;

  static AdamWState for_param(const Tensor& param);
};

// One decoupled-weight-decay update:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,
//   p <- p - lr*(mhat/(sqrt(vhat)+eps) + wd*p)
void adamw_step(Tensor& param, const Tensor& grad, AdamWState& state,
                const AdamWHyper& hyper);

// Optimizer over a fixed list of parameter tensors.
class AdamW {
 public:
  AdamW(const std::vector<Tensor*>& params, AdamWHyper hyper);

  void step(const std::vector<Tensor*>& grads);
  long step_count() const;

 private:
  std::vector<Tensor*> params_;
  std::vector<AdamWState> states_;
  AdamWHyper hyper_;
};

}  // namespace ntrocr
