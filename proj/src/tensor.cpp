#include "ntrocr/tensor.hpp"

#include <cmath>
#include <sstream>

#include "ntrocr/errors.hpp"

namespace ntrocr {

namespace {

long product(const std::vector<int>& shape) {
  long n = 1;
  for (int d : shape) n *= d;
  return n;
}

void check_shape(const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 3) {
    throw ValidationError("tensor rank must be 1..3, got rank " +
                          std::to_string(shape.size()));
  }
  for (int d : shape) {
    if (d <= 0) {
      throw ValidationError("tensor dimensions must be positive");
    }
  }
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
  check_shape(shape);
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(static_cast<size_t>(product(t.shape)), 0.0f);
  return t;
}

Tensor Tensor::full(std::vector<int> shape, float value) {
  Tensor t = zeros(std::move(shape));
  for (float& v : t.data) v = value;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<float> values) {
  check_shape(shape);
  if (static_cast<long>(values.size()) != product(shape)) {
    throw ValidationError("tensor data length " +
                          std::to_string(values.size()) +
                          " does not match shape product " +
                          std::to_string(product(shape)));
  }
  Tensor t;
  t.shape = std::move(shape);
  t.data = std::move(values);
  return t;
}

long Tensor::numel() const { return product(shape); }

bool Tensor::all_finite() const {
  for (float v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_string(const Tensor& t) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < t.shape.size(); ++i) {
    if (i) os << "x";
    os << t.shape[i];
  }
  os << "]";
  return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0]) {
    throw ValidationError("matmul: incompatible shapes " + shape_string(a) +
                          " and " + shape_string(b));
  }
  const int m = a.shape[0], k = a.shape[1], n = b.shape[1];
  Tensor c = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        acc += static_cast<double>(a.at(i, p)) * b.at(p, j);
      }
      c.at(i, j) = static_cast<float>(acc);
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[1]) {
    throw ValidationError("matmul_nt: incompatible shapes " + shape_string(a) +
                          " and " + shape_string(b));
  }
  const int m = a.shape[0], k = a.shape[1], n = b.shape[0];
  Tensor c = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        acc += static_cast<double>(a.at(i, p)) * b.at(j, p);
      }
      c.at(i, j) = static_cast<float>(acc);
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape[0] != b.shape[0]) {
    throw ValidationError("matmul_tn: incompatible shapes " + shape_string(a) +
                          " and " + shape_string(b));
  }
  const int k = a.shape[0], m = a.shape[1], n = b.shape[1];
  Tensor c = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        acc += static_cast<double>(a.at(p, i)) * b.at(p, j);
      }
      c.at(i, j) = static_cast<float>(acc);
    }
  }
  return c;
}

void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& g,
                     Tensor& grad_a, Tensor& grad_b) {
  if (g.rank() != 2 || g.shape[0] != a.shape[0] || g.shape[1] != b.shape[1]) {
    throw ValidationError("matmul_backward: gradient shape " +
                          shape_string(g) + " does not match product of " +
                          shape_string(a) + " and " + shape_string(b));
  }
  if (!grad_a.same_shape(a) || !grad_b.same_shape(b)) {
    throw ValidationError("matmul_backward: gradient accumulators mismatch");
  }
  Tensor ga = matmul_nt(g, b);   // g * b^T
  Tensor gb = matmul_tn(a, g);   // a^T * g
  for (size_t i = 0; i < ga.data.size(); ++i) grad_a.data[i] += ga.data[i];
  for (size_t i = 0; i < gb.data.size(); ++i) grad_b.data[i] += gb.data[i];
}

Tensor softmax_lastdim(const Tensor& x) {
  const int width = x.shape.back();
  if (width < 1) throw ValidationError("softmax: empty last dimension");
  const long rows = x.numel() / width;
  Tensor out = Tensor::zeros(x.shape);
  for (long r = 0; r < rows; ++r) {
    const float* in = x.data.data() + r * width;
    float* o = out.data.data() + r * width;
    float mx = in[0];
    for (int i = 1; i < width; ++i) mx = std::max(mx, in[i]);
    double sum = 0.0;
    for (int i = 0; i < width; ++i) {
      double e = std::exp(static_cast<double>(in[i]) - mx);
      o[i] = static_cast<float>(e);
      sum += e;
    }
    for (int i = 0; i < width; ++i) {
      o[i] = static_cast<float>(o[i] / sum);
    }
  }
  return out;
}

Tensor softmax_lastdim_backward(const Tensor& probs, const Tensor& g) {
  if (!probs.same_shape(g)) {
    throw ValidationError("softmax backward: shape mismatch " +
                          shape_string(probs) + " vs " + shape_string(g));
  }
  const int width = probs.shape.back();
  const long rows = probs.numel() / width;
  Tensor dx = Tensor::zeros(probs.shape);
  for (long r = 0; r < rows; ++r) {
    const float* p = probs.data.data() + r * width;
    const float* gr = g.data.data() + r * width;
    float* d = dx.data.data() + r * width;
    double dot = 0.0;
    for (int i = 0; i < width; ++i) dot += static_cast<double>(gr[i]) * p[i];
    for (int i = 0; i < width; ++i) {
      d[i] = static_cast<float>(p[i] * (static_cast<double>(gr[i]) - dot));
    }
  }
  return dx;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  float eps) {
  const int width = x.shape.back();
  if (gamma.rank() != 1 || beta.rank() != 1 || gamma.shape[0] != width ||
      beta.shape[0] != width) {
    throw ValidationError("layer_norm: gamma/beta shape " +
                          shape_string(gamma) + "/" + shape_string(beta) +
                          " does not match last dim of " + shape_string(x));
  }
  if (eps <= 0.0f) throw ValidationError("layer_norm: eps must be positive");
  const long rows = x.numel() / width;
  Tensor out = Tensor::zeros(x.shape);
  for (long r = 0; r < rows; ++r) {
    const float* in = x.data.data() + r * width;
    float* o = out.data.data() + r * width;
    double mean = 0.0;
    for (int i = 0; i < width; ++i) mean += in[i];
    mean /= width;
    double var = 0.0;
    for (int i = 0; i < width; ++i) {
      double d = in[i] - mean;
      var += d * d;
    }
    var /= width;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int i = 0; i < width; ++i) {
      o[i] = static_cast<float>(gamma.at(i) * ((in[i] - mean) * inv) +
                                beta.at(i));
    }
  }
  return out;
}

Tensor layer_norm_backward(const Tensor& x, const Tensor& gamma, float eps,
                           const Tensor& g, Tensor& grad_gamma,
                           Tensor& grad_beta) {
  if (!x.same_shape(g)) {
    throw ValidationError("layer_norm backward: shape mismatch");
  }
  const int width = x.shape.back();
  const long rows = x.numel() / width;
  Tensor dx = Tensor::zeros(x.shape);
  for (long r = 0; r < rows; ++r) {
    const float* in = x.data.data() + r * width;
    const float* gr = g.data.data() + r * width;
    float* d = dx.data.data() + r * width;
    double mean = 0.0;
    for (int i = 0; i < width; ++i) mean += in[i];
    mean /= width;
    double var = 0.0;
    for (int i = 0; i < width; ++i) {
      double dd = in[i] - mean;
      var += dd * dd;
    }
    var /= width;
    double inv = 1.0 / std::sqrt(var + eps);

    // dxhat, plus parameter grads from xhat.
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int i = 0; i < width; ++i) {
      double xhat = (in[i] - mean) * inv;
      double dxhat = static_cast<double>(gr[i]) * gamma.at(i);
      grad_gamma.at(i) += static_cast<float>(gr[i] * xhat);
      grad_beta.at(i) += gr[i];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
    }
    for (int i = 0; i < width; ++i) {
      double xhat = (in[i] - mean) * inv;
      double dxhat = static_cast<double>(gr[i]) * gamma.at(i);
      d[i] = static_cast<float>(
          inv * (dxhat - sum_dxhat / width - xhat * sum_dxhat_xhat / width));
    }
  }
  return dx;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Tensor gelu(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i) {
    double v = x.data[i];
    double u = kGeluC * (v + kGeluA * v * v * v);
    out.data[i] = static_cast<float>(0.5 * v * (1.0 + std::tanh(u)));
  }
  return out;
}

Tensor gelu_backward(const Tensor& x, const Tensor& g) {
  if (!x.same_shape(g)) throw ValidationError("gelu backward: shape mismatch");
  Tensor dx = Tensor::zeros(x.shape);
  for (size_t i = 0; i < x.data.size(); ++i) {
    double v = x.data[i];
    double u = kGeluC * (v + kGeluA * v * v * v);
    double t = std::tanh(u);
    double sech2 = 1.0 - t * t;
    double du = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    double deriv = 0.5 * (1.0 + t) + 0.5 * v * sech2 * du;
    dx.data[i] = static_cast<float>(g.data[i] * deriv);
  }
  return dx;
}

CrossEntropyResult cross_entropy(const Tensor& logits,
                                 const std::vector<int>& targets,
                                 int ignore_id) {
  if (logits.rank() != 2) {
    throw ValidationError("cross_entropy: logits must be rank 2, got " +
                          shape_string(logits));
  }
  const int rows = logits.shape[0], vocab = logits.shape[1];
  if (static_cast<int>(targets.size()) != rows) {
    throw ValidationError("cross_entropy: " + std::to_string(targets.size()) +
                          " targets for " + std::to_string(rows) + " rows");
  }
  int count = 0;
  for (int t : targets) {
    if (t == ignore_id) continue;
    if (t < 0 || t >= vocab) {
      throw std::out_of_range("cross_entropy: target id " + std::to_string(t) +
                              " outside vocab of " + std::to_string(vocab));
    }
    ++count;
  }
  if (count == 0) {
    throw ValidationError("cross_entropy: no supervised positions");
  }

  CrossEntropyResult res;
  res.dlogits = Tensor::zeros(logits.shape);
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    if (targets[static_cast<size_t>(r)] == ignore_id) continue;
    const float* in = logits.data.data() + static_cast<size_t>(r) * vocab;
    float* d = res.dlogits.data.data() + static_cast<size_t>(r) * vocab;
    double mx = in[0];
    for (int i = 1; i < vocab; ++i) mx = std::max(mx, static_cast<double>(in[i]));
    double sum = 0.0;
    for (int i = 0; i < vocab; ++i) sum += std::exp(in[i] - mx);
    const int tgt = targets[static_cast<size_t>(r)];
    total += -(in[tgt] - mx - std::log(sum));
    for (int i = 0; i < vocab; ++i) {
      double p = std::exp(in[i] - mx) / sum;
      d[i] = static_cast<float>((p - (i == tgt ? 1.0 : 0.0)) / count);
    }
  }
  res.loss = total / count;
  return res;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& x, float h) {
  if (h <= 0.0f) throw ValidationError("finite_diff_grad: h must be positive");
  Tensor grad = Tensor::zeros(x.shape);
  Tensor probe = x;
  for (size_t i = 0; i < x.data.size(); ++i) {
    const float orig = probe.data[i];
    probe.data[i] = orig + h;
    double fp = f(probe);
    probe.data[i] = orig - h;
    double fm = f(probe);
    probe.data[i] = orig;
    grad.data[i] = static_cast<float>((fp - fm) / (2.0 * static_cast<double>(h)));
  }
  return grad;
}

}  // namespace ntrocr
