#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ntrocr/errors.hpp"
#include "ntrocr/optim.hpp"
#include "ntrocr/rng.hpp"
#include "ntrocr/tensor.hpp"

using namespace ntrocr;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, float lo = -2.0f,
                     float hi = 2.0f) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (float& v : t.data) v = rng.uniform_f(lo, hi);
  return t;
}

// |a - b| <= atol + rtol * max(|a|, |b|), elementwise.
bool grads_close(const Tensor& a, const Tensor& b, double rtol, double atol) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double x = a.data[i], y = b.data[i];
    if (std::abs(x - y) > atol + rtol * std::max(std::abs(x), std::abs(y))) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
  Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor prod = matmul(eye, m);
  CHECK(prod.data == m.data);

  Tensor a = Tensor::from({1, 2}, {1, 2});
  Tensor b = Tensor::from({2, 1}, {3, 4});
  Tensor c = matmul(a, b);
  CHECK(c.shape == std::vector<int>{1, 1});
  CHECK(c.at(0, 0) == doctest::Approx(11.0));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({2, 3});
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       "matmul: incompatible shapes [2x3] and [2x3]",
                       ValidationError);
}

TEST_CASE("matmul backward matches finite differences") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    Tensor g = Tensor::full({3, 2}, 1.0f);

    Tensor ga = Tensor::zeros(a.shape);
    Tensor gb = Tensor::zeros(b.shape);
    matmul_backward(a, b, g, ga, gb);

    auto loss_a = [&](const Tensor& x) {
      Tensor c = matmul(x, b);
      double s = 0.0;
      for (float v : c.data) s += v;
      return s;
    };
    auto loss_b = [&](const Tensor& x) {
      Tensor c = matmul(a, x);
      double s = 0.0;
      for (float v : c.data) s += v;
      return s;
    };
    Tensor fa = finite_diff_grad(loss_a, a, 1e-3f);
    Tensor fb = finite_diff_grad(loss_b, b, 1e-3f);
    CHECK(grads_close(ga, fa, 1e-3, 1e-3));
    CHECK(grads_close(gb, fb, 1e-3, 1e-3));
  }
}

TEST_CASE("softmax symmetry and closed form") {
  Tensor x = Tensor::from({2}, {0.0f, 0.0f});
  Tensor y = softmax_lastdim(x);
  CHECK(y.at(0) == doctest::Approx(0.5));
  CHECK(y.at(1) == doctest::Approx(0.5));

  Tensor z = Tensor::from({2}, {0.0f, std::log(3.0f)});
  Tensor w = softmax_lastdim(z);
  CHECK(w.at(0) == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(w.at(1) == doctest::Approx(0.75).epsilon(1e-5));
}

TEST_CASE("softmax rows sum to one, shift invariant, monotone") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor({3, 5}, rng, -4.0f, 4.0f);
    Tensor y = softmax_lastdim(x);
    for (int r = 0; r < 3; ++r) {
      double sum = 0.0;
      for (int c = 0; c < 5; ++c) sum += y.at(r, c);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }
    Tensor shifted = x;
    for (float& v : shifted.data) v += 1.25f;
    Tensor ys = softmax_lastdim(shifted);
    for (size_t i = 0; i < y.data.size(); ++i) {
      CHECK(std::abs(y.data[i] - ys.data[i]) < 1e-5f);
    }
    for (int r = 0; r < 3; ++r) {
      for (int c1 = 0; c1 < 5; ++c1) {
        for (int c2 = 0; c2 < 5; ++c2) {
          if (x.at(r, c1) > x.at(r, c2)) CHECK(y.at(r, c1) >= y.at(r, c2));
        }
      }
    }
  }
}

TEST_CASE("softmax backward matches finite differences") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 100);
    Tensor x = random_tensor({2, 4}, rng);
    Tensor g = random_tensor({2, 4}, rng, -1.0f, 1.0f);
    Tensor probs = softmax_lastdim(x);
    Tensor dx = softmax_lastdim_backward(probs, g);
    auto loss = [&](const Tensor& t) {
      Tensor y = softmax_lastdim(t);
      double s = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) {
        s += static_cast<double>(y.data[i]) * g.data[i];
      }
      return s;
    };
    Tensor fd = finite_diff_grad(loss, x, 1e-3f);
    CHECK(grads_close(dx, fd, 1e-3, 1e-3));
  }
}

TEST_CASE("layer_norm constant slice and exact two-point case") {
  Tensor gamma = Tensor::full({3}, 1.0f);
  Tensor beta = Tensor::zeros({3});
  Tensor x = Tensor::from({3}, {5, 5, 5});
  Tensor y = layer_norm(x, gamma, beta, 1e-5f);
  for (float v : y.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-4));

  Tensor g2 = Tensor::full({2}, 1.0f);
  Tensor b2 = Tensor::zeros({2});
  Tensor x2 = Tensor::from({2}, {1, 3});
  Tensor y2 = layer_norm(x2, g2, b2, 1e-12f);
  CHECK(y2.at(0) == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(y2.at(1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("layer_norm normalizes mean and variance") {
  Rng rng(3);
  Tensor x = random_tensor({4, 16}, rng, -3.0f, 3.0f);
  Tensor gamma = Tensor::full({16}, 1.0f);
  Tensor beta = Tensor::zeros({16});
  Tensor y = layer_norm(x, gamma, beta, 1e-5f);
  for (int r = 0; r < 4; ++r) {
    double mean = 0.0;
    for (int c = 0; c < 16; ++c) mean += y.at(r, c);
    mean /= 16;
    double var = 0.0;
    for (int c = 0; c < 16; ++c) var += (y.at(r, c) - mean) * (y.at(r, c) - mean);
    var /= 16;
    CHECK(std::abs(mean) < 1e-5);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("layer_norm backward matches finite differences") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 50);
    Tensor x = random_tensor({2, 6}, rng);
    Tensor gamma = random_tensor({6}, rng, 0.5f, 1.5f);
    Tensor beta = random_tensor({6}, rng, -0.5f, 0.5f);
    Tensor g = random_tensor({2, 6}, rng, -1.0f, 1.0f);
    const float eps = 1e-5f;

    Tensor gg = Tensor::zeros({6});
    Tensor gb = Tensor::zeros({6});
    Tensor dx = layer_norm_backward(x, gamma, eps, g, gg, gb);

    auto weighted = [&](const Tensor& y) {
      double s = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) {
        s += static_cast<double>(y.data[i]) * g.data[i];
      }
      return s;
    };
    Tensor fdx = finite_diff_grad(
        [&](const Tensor& t) { return weighted(layer_norm(t, gamma, beta, eps)); },
        x, 1e-3f);
    Tensor fdg = finite_diff_grad(
        [&](const Tensor& t) { return weighted(layer_norm(x, t, beta, eps)); },
        gamma, 1e-3f);
    Tensor fdb = finite_diff_grad(
        [&](const Tensor& t) { return weighted(layer_norm(x, gamma, t, eps)); },
        beta, 1e-3f);
    CHECK(grads_close(dx, fdx, 1e-3, 1e-3));
    CHECK(grads_close(gg, fdg, 1e-3, 1e-3));
    CHECK(grads_close(gb, fdb, 1e-3, 1e-3));
  }
}

TEST_CASE("gelu fixed points and gradient") {
  Tensor zero = Tensor::from({1}, {0.0f});
  CHECK(gelu(zero).at(0) == 0.0f);

  Tensor big = Tensor::from({1}, {10.0f});
  CHECK(gelu(big).at(0) == doctest::Approx(10.0).epsilon(1e-4));

  Tensor x = Tensor::from({1}, {0.5f});
  Tensor g = Tensor::full({1}, 1.0f);
  Tensor dx = gelu_backward(x, g);
  Tensor fd = finite_diff_grad(
      [](const Tensor& t) { return static_cast<double>(gelu(t).at(0)); }, x,
      1e-3f);
  CHECK(grads_close(dx, fd, 1e-3, 1e-3));
}

TEST_CASE("gelu backward matches finite differences on random input") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 200);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor g = random_tensor({3, 4}, rng, -1.0f, 1.0f);
    Tensor dx = gelu_backward(x, g);
    auto loss = [&](const Tensor& t) {
      Tensor y = gelu(t);
      double s = 0.0;
      for (size_t i = 0; i < y.data.size(); ++i) {
        s += static_cast<double>(y.data[i]) * g.data[i];
      }
      return s;
    };
    Tensor fd = finite_diff_grad(loss, x, 1e-3f);
    CHECK(grads_close(dx, fd, 1e-3, 1e-3));
  }
}

TEST_CASE("cross_entropy uniform logits give ln V") {
  Tensor logits = Tensor::zeros({1, 4});
  auto res = cross_entropy(logits, {2}, 0);
  CHECK(res.loss == doctest::Approx(std::log(4.0)).epsilon(1e-6));
}

TEST_CASE("cross_entropy confident correct is near zero") {
  Tensor logits = Tensor::zeros({1, 4});
  logits.at(0, 1) = 1e4f;
  auto res = cross_entropy(logits, {1}, 0);
  CHECK(res.loss == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("cross_entropy degenerate and error cases") {
  Tensor logits = Tensor::zeros({2, 4});
  CHECK_THROWS_WITH_AS(cross_entropy(logits, {0, 0}, 0),
                       "cross_entropy: no supervised positions",
                       ValidationError);
  CHECK_THROWS_AS(cross_entropy(logits, {1, 9}, 0), std::out_of_range);
}

TEST_CASE("cross_entropy gradient matches finite differences") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 300);
    Tensor logits = random_tensor({4, 5}, rng);
    std::vector<int> targets = {1, 0, 3, 2};
    targets[1] = 0;  // row ignored via ignore_id 0
    auto res = cross_entropy(logits, targets, 0);
    Tensor fd = finite_diff_grad(
        [&](const Tensor& t) { return cross_entropy(t, targets, 0).loss; },
        logits, 1e-3f);
    CHECK(grads_close(res.dlogits, fd, 1e-3, 1e-3));
  }
}

TEST_CASE("finite_diff_grad on known functions") {
  Tensor x = Tensor::from({2}, {1, 2});
  Tensor g = finite_diff_grad(
      [](const Tensor& t) {
        double s = 0.0;
        for (float v : t.data) s += static_cast<double>(v) * v;
        return s;
      },
      x, 1e-3f);
  CHECK(g.at(0) == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(g.at(1) == doctest::Approx(4.0).epsilon(1e-2));

  Tensor c = finite_diff_grad([](const Tensor&) { return 3.5; }, x, 1e-3f);
  CHECK(c.at(0) == 0.0f);
  CHECK(c.at(1) == 0.0f);

  Tensor w = Tensor::from({2}, {0.5f, -1.5f});
  Tensor d = finite_diff_grad(
      [&](const Tensor& t) {
        double s = 0.0;
        for (size_t i = 0; i < t.data.size(); ++i) {
          s += static_cast<double>(t.data[i]) * w.data[i];
        }
        return s;
      },
      x, 1e-3f);
  CHECK(grads_close(d, w, 1e-3, 1e-3));
}

TEST_CASE("ops are pure: repeated calls give identical bits") {
  Rng rng(11);
  Tensor a = random_tensor({3, 3}, rng);
  Tensor b = random_tensor({3, 3}, rng);
  CHECK(matmul(a, b).data == matmul(a, b).data);
  CHECK(softmax_lastdim(a).data == softmax_lastdim(a).data);
  CHECK(gelu(a).data == gelu(a).data);
  Tensor gm = Tensor::full({3}, 1.0f);
  Tensor bt = Tensor::zeros({3});
  CHECK(layer_norm(a, gm, bt, 1e-5f).data == layer_norm(a, gm, bt, 1e-5f).data);
}

TEST_CASE("tensor shape and finiteness invariants") {
  CHECK_THROWS_AS(Tensor::zeros({0, 2}), ValidationError);
  CHECK_THROWS_AS(Tensor::zeros({1, 2, 3, 4}), ValidationError);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ValidationError);

  Rng rng(5);
  Tensor x = random_tensor({2, 3, 4}, rng);
  CHECK(x.all_finite());
  CHECK(softmax_lastdim(x).all_finite());
  CHECK(gelu(x).all_finite());
}

TEST_CASE("adamw zero gradient is pure decay") {
  Tensor p = Tensor::from({3}, {1.0f, -2.0f, 0.5f});
  Tensor g = Tensor::zeros({3});
  AdamWState st = AdamWState::for_param(p);
  AdamWHyper hy;
  hy.lr = 0.1;
  hy.weight_decay = 0.01;
  Tensor before = p;
  adamw_step(p, g, st, hy);
  for (size_t i = 0; i < p.data.size(); ++i) {
    CHECK(p.data[i] ==
          doctest::Approx(before.data[i] * 0.999).epsilon(1e-6));
  }
  CHECK(st.step == 1);
}

TEST_CASE("adamw zero gradient zero decay is identity") {
  Rng rng(9);
  Tensor p = random_tensor({4}, rng);
  Tensor before = p;
  Tensor g = Tensor::zeros({4});
  AdamWState st = AdamWState::for_param(p);
  AdamWHyper hy;
  hy.weight_decay = 0.0;
  adamw_step(p, g, st, hy);
  CHECK(p.data == before.data);
}

TEST_CASE("adamw first unit-gradient step has magnitude lr") {
  Tensor p = Tensor::zeros({4});
  Tensor g = Tensor::full({4}, 1.0f);
  AdamWState st = AdamWState::for_param(p);
  AdamWHyper hy;
  hy.lr = 1e-3;
  hy.weight_decay = 0.0;
  adamw_step(p, g, st, hy);
  for (float v : p.data) {
    CHECK(std::abs(-static_cast<double>(v) - hy.lr) < 1e-6 * hy.lr + 1e-12);
  }
}

TEST_CASE("adamw moments stay valid and v nonnegative") {
  Rng rng(21);
  Tensor p = random_tensor({8}, rng);
  AdamWState st = AdamWState::for_param(p);
  AdamWHyper hy;
  for (int it = 0; it < 20; ++it) {
    Tensor g = random_tensor({8}, rng, -3.0f, 3.0f);
    adamw_step(p, g, st, hy);
    CHECK(st.step == it + 1);
    for (float v : st.v.data) CHECK(v >= 0.0f);
    CHECK(p.all_finite());
  }
}

TEST_CASE("adamw descends a convex quadratic") {
  // f(p) = sum (p - t)^2 with constant target.
  Tensor target = Tensor::from({2}, {0.3f, -0.7f});
  Tensor p = Tensor::from({2}, {2.0f, 2.0f});
  AdamWState st = AdamWState::for_param(p);
  AdamWHyper hy;
  hy.lr = 0.05;
  hy.weight_decay = 0.0;
  auto loss = [&](const Tensor& q) {
    double s = 0.0;
    for (size_t i = 0; i < q.data.size(); ++i) {
      double d = q.data[i] - target.data[i];
      s += d * d;
    }
    return s;
  };
  double l0 = loss(p);
  for (int it = 0; it < 2; ++it) {
    Tensor g = Tensor::zeros({2});
    for (size_t i = 0; i < g.data.size(); ++i) {
      g.data[i] = 2.0f * (p.data[i] - target.data[i]);
    }
    adamw_step(p, g, st, hy);
  }
  CHECK(loss(p) < l0);
}

TEST_CASE("adamw rejects invalid hyperparameters and shapes") {
  Tensor p = Tensor::zeros({2});
  Tensor g = Tensor::zeros({3});
  AdamWState st = AdamWState::for_param(p);
  AdamWHyper hy;
  CHECK_THROWS_AS(adamw_step(p, g, st, hy), ValidationError);
  AdamWHyper bad;
  bad.beta1 = 1.0;
  Tensor g2 = Tensor::zeros({2});
  CHECK_THROWS_AS(adamw_step(p, g2, st, bad), ValidationError);
}
