#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ntrocr {

/// Dense row-major float32 array of rank 1 to 3. All model math runs on it.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, float value);
  static Tensor from(std::vector<int> shape, std::vector<float> values);

  int rank() const { return static_cast<int>(shape.size()); }
  long numel() const;
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  float& at(int i) { return data[static_cast<size_t>(i)]; }
  float at(int i) const { return data[static_cast<size_t>(i)]; }
  float& at(int i, int j) {
    return data[static_cast<size_t>(i) * shape[1] + j];
  }
  float at(int i, int j) const {
    return data[static_cast<size_t>(i) * shape[1] + j];
  }
  float& at(int i, int j, int k) {
    return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  float at(int i, int j, int k) const {
    return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
};

std::string shape_string(const Tensor& t);

// c[i][j] = sum_k a[i][k] * b[k][j]. Accumulates in double.
Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T; shapes [m x k] * [n x k] -> [m x n].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a^T * b; shapes [k x m] * [k x n] -> [m x n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// Adds grad_a += g * b^T and grad_b += a^T * g.
void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& g,
                     Tensor& grad_a, Tensor& grad_b);

// Numerically stable softmax over the last dimension.
Tensor softmax_lastdim(const Tensor& x);
// Given probs = softmax(x) and upstream g, returns dx.
Tensor softmax_lastdim_backward(const Tensor& probs, const Tensor& g);

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  float eps);
// Accumulates parameter grads; returns dx.
Tensor layer_norm_backward(const Tensor& x, const Tensor& gamma, float eps,
                           const Tensor& g, Tensor& grad_gamma,
                           Tensor& grad_beta);

// tanh approximation: 0.5*x*(1 + tanh(sqrt(2/pi)*(x + 0.044715*x^3))).
Tensor gelu(const Tensor& x);
Tensor gelu_backward(const Tensor& x, const Tensor& g);

struct CrossEntropyResult {
  double loss = 0.0;
  Tensor dlogits;
};

// Mean negative log-likelihood over rows whose target is not ignore_id.
// dlogits rows are (softmax - onehot) / count; ignored rows stay zero.
CrossEntropyResult cross_entropy(const Tensor& logits,
                                 const std::vector<int>& targets,
                                 int ignore_id);

// Central differences: g[i] = (f(x + h e_i) - f(x - h e_i)) / (2h).
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& x, float h);

}  // namespace ntrocr
