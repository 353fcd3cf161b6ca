#include "ntrocr/optim.hpp"

#include <cmath>

#include "ntrocr/errors.hpp"

namespace ntrocr {

namespace {

void check_hyper(const AdamWHyper& h) {
  if (h.lr < 0.0 || h.eps < 0.0 || h.weight_decay < 0.0) {
    throw ValidationError("adamw: lr, eps, weight_decay must be nonnegative");
  }
  if (h.beta1 < 0.0 || h.beta1 >= 1.0 || h.beta2 < 0.0 || h.beta2 >= 1.0) {
    throw ValidationError("adamw: betas must lie in [0,1)");
  }
}

}  // namespace

AdamWState AdamWState::for_param(const Tensor& param) {
  AdamWState s;
  s.m = Tensor::zeros(param.shape);
  s.v = Tensor::zeros(param.shape);
  return s;
}

void adamw_step(Tensor& param, const Tensor& grad, AdamWState& state,
                const AdamWHyper& hyper) {
  check_hyper(hyper);
  if (!param.same_shape(grad) || !param.same_shape(state.m) ||
      !param.same_shape(state.v)) {
    throw ValidationError("adamw: parameter " + shape_string(param) +
                          " and gradient " + shape_string(grad) +
                          " shapes must agree");
  }
  state.step += 1;
  const double b1 = hyper.beta1, b2 = hyper.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i];
    const double m = b1 * state.m.data[i] + (1.0 - b1) * g;
    const double v = b2 * state.v.data[i] + (1.0 - b2) * g * g;
    state.m.data[i] = static_cast<float>(m);
    state.v.data[i] = static_cast<float>(v);
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    const double p = param.data[i];
    param.data[i] = static_cast<float>(
        p - hyper.lr * (mhat / (std::sqrt(vhat) + hyper.eps) +
                        hyper.weight_decay * p));
  }
}

AdamW::AdamW(const std::vector<Tensor*>& params, AdamWHyper hyper)
    : params_(params), hyper_(hyper) {
  check_hyper(hyper_);
  states_.reserve(params_.size());
  for (const Tensor* p : params_) {
    states_.push_back(AdamWState::for_param(*p));
  }
}

void AdamW::step(const std::vector<Tensor*>& grads) {
  if (grads.size() != params_.size()) {
    throw ValidationError("adamw: gradient list length mismatch");
  }
  for (size_t i = 0; i < params_.size(); ++i) {
    adamw_step(*params_[i], *grads[i], states_[i], hyper_);
  }
}

long AdamW::step_count() const {
  return states_.empty() ? 0 : states_.front().step;
}

}  // namespace ntrocr
