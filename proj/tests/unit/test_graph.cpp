#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "xmodseg/core/rng.hpp"
#include "xmodseg/nn/graph.hpp"
#include "xmodseg/nn/modules.hpp"

using xmodseg::Rng;
using xmodseg::nn::Graph;
using xmodseg::nn::Parameter;
using xmodseg::nn::Tensor;
using xmodseg::testing::gradcheck;

namespace {

Tensor<double> random_tensor(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0,
                             double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.raw()) v = rng.uniform(lo, hi);
  return t;
}

// Reference convolution: direct quadruple loop, zero padding.
Tensor<double> naive_conv2d(const Tensor<double>& x, const Tensor<double>& w,
                            const Tensor<double>& b, std::int64_t stride,
                            std::int64_t pad) {
  const std::int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t K = w.dim(0), R = w.dim(2), S = w.dim(3);
  const std::int64_t OH = (H + 2 * pad - R) / stride + 1;
  const std::int64_t OW = (W + 2 * pad - S) / stride + 1;
  Tensor<double> y({N, K, OH, OW});
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t k = 0; k < K; ++k)
      for (std::int64_t oh = 0; oh < OH; ++oh)
        for (std::int64_t ow = 0; ow < OW; ++ow) {
          double acc = b.numel() ? b.raw()[k] : 0.0;
          for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t r = 0; r < R; ++r)
              for (std::int64_t s = 0; s < S; ++s) {
                const std::int64_t ih = oh * stride - pad + r;
                const std::int64_t iw = ow * stride - pad + s;
                if (ih >= 0 && ih < H && iw >= 0 && iw < W) {
                  acc += x.at(n, c, ih, iw) * w.at(k, c, r, s);
                }
              }
          y.at(n, k, oh, ow) = acc;
        }
  return y;
}

// Reference transposed convolution via the scatter definition.
Tensor<double> naive_conv_transpose2d(const Tensor<double>& x, const Tensor<double>& w,
                                      const Tensor<double>& b, std::int64_t stride,
                                      std::int64_t pad, std::int64_t out_pad) {
  const std::int64_t N = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t Cout = w.dim(1), R = w.dim(2), S = w.dim(3);
  const std::int64_t OH = (H - 1) * stride - 2 * pad + R + out_pad;
  const std::int64_t OW = (W - 1) * stride - 2 * pad + S + out_pad;
  Tensor<double> y({N, Cout, OH, OW});
  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t co = 0; co < Cout; ++co)
      for (std::int64_t i = 0; i < OH * OW; ++i)
        y.raw()[((n * Cout + co) * OH * OW) + i] = b.numel() ? b.raw()[co] : 0.0;
    for (std::int64_t ci = 0; ci < Cin; ++ci)
      for (std::int64_t h = 0; h < H; ++h)
        for (std::int64_t ww = 0; ww < W; ++ww)
          for (std::int64_t co = 0; co < Cout; ++co)
            for (std::int64_t r = 0; r < R; ++r)
              for (std::int64_t s = 0; s < S; ++s) {
                const std::int64_t oh = h * stride - pad + r;
                const std::int64_t ow = ww * stride - pad + s;
                if (oh >= 0 && oh < OH && ow >= 0 && ow < OW) {
                  y.at(n, co, oh, ow) += x.at(n, ci, h, ww) * w.at(ci, co, r, s);
                }
              }
  }
  return y;
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("conv2d matches the direct-loop reference") {
  Rng rng(11);
  for (const auto [stride, pad] : {std::pair<std::int64_t, std::int64_t>{1, 1},
                                   {2, 1},
                                   {1, 0},
                                   {2, 0}}) {
    auto x = random_tensor({2, 3, 7, 6}, rng);
    auto w = random_tensor({4, 3, 3, 3}, rng);
    auto b = random_tensor({4}, rng);
    Graph<double> g;
    const int y = g.conv2d(g.input(x), g.input(w), g.input(b), stride, pad);
    const auto ref = naive_conv2d(x, w, b, stride, pad);
    REQUIRE(g.value(y).shape() == ref.shape());
    for (std::int64_t i = 0; i < ref.numel(); ++i) {
      CHECK(g.value(y).raw()[i] == doctest::Approx(ref.raw()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv_transpose2d matches the scatter reference") {
  Rng rng(12);
  for (const auto [stride, pad, op] :
       {std::tuple<std::int64_t, std::int64_t, std::int64_t>{2, 1, 1}, {1, 1, 0}, {2, 0, 0}}) {
    auto x = random_tensor({2, 3, 5, 4}, rng);
    auto w = random_tensor({3, 2, 3, 3}, rng);
    auto b = random_tensor({2}, rng);
    Graph<double> g;
    const int y = g.conv_transpose2d(g.input(x), g.input(w), g.input(b), stride, pad, op);
    const auto ref = naive_conv_transpose2d(x, w, b, stride, pad, op);
    REQUIRE(g.value(y).shape() == ref.shape());
    for (std::int64_t i = 0; i < ref.numel(); ++i) {
      CHECK(g.value(y).raw()[i] == doctest::Approx(ref.raw()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(13);
  Parameter<double> x("x", random_tensor({2, 2, 6, 6}, rng));
  Parameter<double> w("w", random_tensor({3, 2, 3, 3}, rng, -0.5, 0.5));
  Parameter<double> b("b", random_tensor({3}, rng));
  const auto build = [&](Graph<double>& g) {
    const int y = g.conv2d(g.param(x), g.param(w), g.param(b), 2, 1);
    return g.mean(g.square(y));
  };
  const auto res = gradcheck({&x, &w, &b}, build);
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("conv_transpose2d gradients match finite differences") {
  Rng rng(14);
  Parameter<double> x("x", random_tensor({1, 3, 4, 4}, rng));
  Parameter<double> w("w", random_tensor({3, 2, 3, 3}, rng, -0.5, 0.5));
  Parameter<double> b("b", random_tensor({2}, rng));
  const auto build = [&](Graph<double>& g) {
    const int y = g.conv_transpose2d(g.param(x), g.param(w), g.param(b), 2, 1, 1);
    return g.mean(g.square(y));
  };
  const auto res = gradcheck({&x, &w, &b}, build);
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("instance_norm gradients match finite differences") {
  Rng rng(15);
  Parameter<double> x("x", random_tensor({2, 3, 4, 4}, rng));
  Parameter<double> gamma("g", random_tensor({3}, rng, 0.5, 1.5));
  Parameter<double> beta("b", random_tensor({3}, rng));
  Parameter<double> probe("p", random_tensor({2, 3, 4, 4}, rng));
  const auto build = [&](Graph<double>& g) {
    const int y = g.instance_norm(g.param(x), g.param(gamma), g.param(beta));
    return g.mean(g.square(g.mul(y, g.param(probe))));
  };
  const auto res = gradcheck({&x, &gamma, &beta}, build);
  CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("batch_norm training-mode gradients match finite differences") {
  Rng rng(16);
  Parameter<double> x("x", random_tensor({3, 2, 4, 4}, rng));
  Parameter<double> gamma("g", random_tensor({2}, rng, 0.5, 1.5));
  Parameter<double> beta("b", random_tensor({2}, rng));
  Parameter<double> rm("rm", Tensor<double>({2}), false);
  Parameter<double> rv("rv", Tensor<double>({2}, 1.0), false);
  Parameter<double> probe("p", random_tensor({3, 2, 4, 4}, rng));
  const auto build = [&](Graph<double>& g) {
    const int y = g.batch_norm(g.param(x), g.param(gamma), g.param(beta), rm, rv, true);
    return g.mean(g.square(g.mul(y, g.param(probe))));
  };
  const auto res = gradcheck({&x, &gamma, &beta}, build);
  CHECK(res.max_rel_err < 1e-5);
}

TEST_CASE("batch_norm eval mode uses running statistics") {
  Rng rng(17);
  Parameter<double> gamma("g", Tensor<double>({1}, 1.0));
  Parameter<double> beta("b", Tensor<double>({1}));
  Parameter<double> rm("rm", Tensor<double>({1}, 2.0), false);
  Parameter<double> rv("rv", Tensor<double>({1}, 4.0), false);
  auto x = Tensor<double>({1, 1, 2, 2}, 2.0);
  Graph<double> g;
  const int y = g.batch_norm(g.input(x), g.param(gamma), g.param(beta), rm, rv, false);
  for (const double v : g.value(y).raw()) {
    CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("pool, pad, concat and select gradients match finite differences") {
  Rng rng(18);
  Parameter<double> x("x", random_tensor({2, 2, 6, 6}, rng));
  Parameter<double> y("y", random_tensor({2, 3, 3, 3}, rng));
  const auto build = [&](Graph<double>& g) {
    const int pooled = g.max_pool2(g.param(x));             // (2,2,3,3)
    const int padded = g.reflect_pad(pooled, 1);            // (2,2,5,5)
    const int cat = g.concat_channels(pooled, g.param(y));  // (2,5,3,3)
    const int s0 = g.select_sample(cat, 0);
    const int s1 = g.select_sample(cat, 1);
    const int spatial = g.mean(g.square(padded));
    return g.add(spatial,
                 g.add(g.mean(g.square(s0)), g.mean(g.square(g.add(s1, s1)))));
  };
  const auto res = gradcheck({&x, &y}, build);
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("elementwise chain gradients match finite differences") {
  Rng rng(19);
  Parameter<double> x("x", random_tensor({1, 1, 4, 4}, rng, 0.2, 0.8));
  const auto build = [&](Graph<double>& g) {
    const int p = g.param(x);
    const int a = g.sigmoid(g.scale(p, 3.0));
    const int b = g.tanh(g.add_const(p, 0.1));
    const int c = g.leaky_relu(g.sub(a, b), 0.2);
    const int d = g.log(g.clamp(a, 1e-7, 1.0 - 1e-7));
    const int e = g.abs(g.mul(c, d));
    const int f = g.div(g.sum(e), g.add_const(g.sum(a), 1.0));
    return f;
  };
  const auto res = gradcheck({&x}, build);
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("reflect_pad values mirror without repeating the edge") {
  Tensor<double> x = Tensor<double>::from_vector({1, 1, 1, 3}, {1.0, 2.0, 3.0});
  Graph<double> g;
  const int y = g.reflect_pad(g.input(x), 0);
  CHECK(g.value(y).raw() == std::vector<double>{1.0, 2.0, 3.0});
  Tensor<double> x2 = Tensor<double>::from_vector({1, 1, 3, 3},
                                                  {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Graph<double> g2;
  const int y2 = g2.reflect_pad(g2.input(x2), 1);
  const auto& v = g2.value(y2);
  CHECK(v.at(0, 0, 0, 0) == 5.0);  // mirrors row 1, col 1
  CHECK(v.at(0, 0, 2, 2) == 5.0);
  CHECK(v.at(0, 0, 0, 2) == 5.0);
  CHECK(v.at(0, 0, 1, 1) == 1.0);
}

TEST_CASE("gradients accumulate across shared subexpressions") {
  Parameter<double> x("x", Tensor<double>({1}, 3.0));
  const auto build = [&](Graph<double>& g) {
    const int p = g.param(x);
    return g.add(g.mul(p, p), g.scale(p, 2.0));  // x^2 + 2x, d/dx = 2x + 2 = 8
  };
  x.zero_grad();
  Graph<double> g;
  const int loss = build(g);
  g.backward(loss);
  CHECK(x.grad.raw()[0] == doctest::Approx(8.0));
}

TEST_CASE("parameter initialization is deterministic given seed and name") {
  using xmodseg::nn::kaiming_normal;
  const auto a = kaiming_normal<double>({4, 3, 3, 3}, 27, std::sqrt(2.0), 99, "net.w");
  const auto b = kaiming_normal<double>({4, 3, 3, 3}, 27, std::sqrt(2.0), 99, "net.w");
  const auto c = kaiming_normal<double>({4, 3, 3, 3}, 27, std::sqrt(2.0), 99, "net.v");
  CHECK(a.raw() == b.raw());
  CHECK(a.raw() != c.raw());
}

TEST_SUITE_END();
