#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "xmodseg/core/error.hpp"
#include "xmodseg/nn/parameter.hpp"
#include "xmodseg/nn/tensor.hpp"

namespace xmodseg::nn {

// Reverse-mode autodiff tape. A Graph is rebuilt per forward pass; leaves
// reference Parameter storage so gradients land in Parameter::grad after
// backward(). Node ids are creation-ordered, which makes a reverse sweep a
// valid topological order.
template <typename T>
class Graph {
 public:
  using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapM = Eigen::Map<MatRM>;
  using CMapM = Eigen::Map<const MatRM>;
  using BackwardFn = std::function<void(Graph&, int)>;

  struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated on first accumulation
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  int input(Tensor<T> value, bool requires_grad = false) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int param(Parameter<T>& p) {
    Node n;
    n.value = p.value;  // snapshot; parameters change only between graphs
    n.requires_grad = true;
    n.param = &p;
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    param_leaves_.push_back(id);
    return id;
  }

  const Tensor<T>& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor<T>& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

  // ---- elementwise ----

  int add(int a, int b) { return binary(a, b, [](T x, T y) { return x + y; },
                                        [](T, T, T g) { return std::pair<T, T>{g, g}; }); }

  int sub(int a, int b) { return binary(a, b, [](T x, T y) { return x - y; },
                                        [](T, T, T g) { return std::pair<T, T>{g, -g}; }); }

  int mul(int a, int b) {
    return binary(a, b, [](T x, T y) { return x * y; },
                  [](T x, T y, T g) { return std::pair<T, T>{g * y, g * x}; });
  }

  int div(int a, int b) {
    return binary(a, b, [](T x, T y) { return x / y; },
                  [](T x, T y, T g) {
                    return std::pair<T, T>{g / y, -g * x / (y * y)};
                  });
  }

  int scale(int a, T k) {
    return unary(a, [k](T x) { return k * x; }, [k](T, T, T g) { return k * g; });
  }

  int add_const(int a, T k) {
    return unary(a, [k](T x) { return x + k; }, [](T, T, T g) { return g; });
  }

  int square(int a) {
    return unary(a, [](T x) { return x * x; },
                 [](T x, T, T g) { return T(2) * x * g; });
  }

  int abs(int a) {
    return unary(a, [](T x) { return std::abs(x); },
                 [](T x, T, T g) { return x > T(0) ? g : (x < T(0) ? -g : T(0)); });
  }

  int log(int a) {
    return unary(a, [](T x) { return std::log(x); }, [](T x, T, T g) { return g / x; });
  }

  int clamp(int a, T lo, T hi) {
    return unary(a, [lo, hi](T x) { return std::min(hi, std::max(lo, x)); },
                 [lo, hi](T x, T, T g) { return (x >= lo && x <= hi) ? g : T(0); });
  }

  int relu(int a) {
    return unary(a, [](T x) { return x > T(0) ? x : T(0); },
                 [](T x, T, T g) { return x > T(0) ? g : T(0); });
  }

  int leaky_relu(int a, T slope) {
    return unary(a, [slope](T x) { return x > T(0) ? x : slope * x; },
                 [slope](T x, T, T g) { return x > T(0) ? g : slope * g; });
  }

  int tanh(int a) {
    return unary(a, [](T x) { return std::tanh(x); },
                 [](T, T y, T g) { return (T(1) - y * y) * g; });
  }

  int sigmoid(int a) {
    return unary(a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
                 [](T, T y, T g) { return y * (T(1) - y) * g; });
  }

  // ---- reductions ----

  int sum(int a) {
    const Tensor<T>& x = value(a);
    T acc{};
    for (const T v : x.raw()) acc += v;
    Tensor<T> out({1});
    out.raw()[0] = acc;
    return attach(std::move(out), {a}, [a](Graph& g, int self) {
      if (!g.requires_grad(a)) return;
      const T go = g.grad(self).raw()[0];
      Tensor<T>& ga = g.grad_buffer(a);
      for (auto& v : ga.raw()) v += go;
    });
  }

  int mean(int a) {
    const std::int64_t n = value(a).numel();
    check(n > 0, "mean: empty tensor");
    return scale(sum(a), T(1) / static_cast<T>(n));
  }

  // ---- structure ----

  int detach(int a) { return input(value(a), false); }

  int select_sample(int x, std::int64_t n) {
    const Tensor<T>& xv = value(x);
    check(xv.ndim() == 4, "select_sample: expected NCHW");
    check(n >= 0 && n < xv.dim(0), "select_sample: index out of range");
    const std::int64_t stride = xv.numel() / xv.dim(0);
    Tensor<T> out({1, xv.dim(1), xv.dim(2), xv.dim(3)});
    std::copy_n(xv.data() + n * stride, stride, out.data());
    return attach(std::move(out), {x}, [x, n, stride](Graph& g, int self) {
      if (!g.requires_grad(x)) return;
      Tensor<T>& gx = g.grad_buffer(x);
      const T* go = g.grad(self).data();
      T* dst = gx.data() + n * stride;
      for (std::int64_t i = 0; i < stride; ++i) dst[i] += go[i];
    });
  }

  int concat_channels(int a, int b) {
    const Tensor<T>& av = value(a);
    const Tensor<T>& bv = value(b);
    check(av.ndim() == 4 && bv.ndim() == 4, "concat: expected NCHW");
    check(av.dim(0) == bv.dim(0) && av.dim(2) == bv.dim(2) && av.dim(3) == bv.dim(3),
          "concat: incompatible shapes " + Tensor<T>::shape_str(av.shape()) + " vs " +
              Tensor<T>::shape_str(bv.shape()));
    const std::int64_t n = av.dim(0), ca = av.dim(1), cb = bv.dim(1);
    const std::int64_t hw = av.dim(2) * av.dim(3);
    Tensor<T> out({n, ca + cb, av.dim(2), av.dim(3)});
    for (std::int64_t i = 0; i < n; ++i) {
      std::copy_n(av.data() + i * ca * hw, ca * hw, out.data() + i * (ca + cb) * hw);
      std::copy_n(bv.data() + i * cb * hw, cb * hw, out.data() + (i * (ca + cb) + ca) * hw);
    }
    return attach(std::move(out), {a, b}, [a, b, n, ca, cb, hw](Graph& g, int self) {
      const T* go = g.grad(self).data();
      if (g.requires_grad(a)) {
        T* ga = g.grad_buffer(a).data();
        for (std::int64_t i = 0; i < n; ++i) {
          const T* src = go + i * (ca + cb) * hw;
          T* dst = ga + i * ca * hw;
          for (std::int64_t j = 0; j < ca * hw; ++j) dst[j] += src[j];
        }
      }
      if (g.requires_grad(b)) {
        T* gb = g.grad_buffer(b).data();
        for (std::int64_t i = 0; i < n; ++i) {
          const T* src = go + (i * (ca + cb) + ca) * hw;
          T* dst = gb + i * cb * hw;
          for (std::int64_t j = 0; j < cb * hw; ++j) dst[j] += src[j];
        }
      }
    });
  }

  int reflect_pad(int x, int p) {
    const Tensor<T>& xv = value(x);
    check(xv.ndim() == 4, "reflect_pad: expected NCHW");
    const std::int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    check(p >= 0 && p < H && p < W, "reflect_pad: pad too large for input");
    Tensor<T> out({N, C, H + 2 * p, W + 2 * p});
    const auto reflect = [](std::int64_t i, std::int64_t n) {
      if (i < 0) return -i;
      if (i >= n) return 2 * n - 2 - i;
      return i;
    };
    for (std::int64_t nc = 0; nc < N * C; ++nc) {
      const T* src = xv.data() + nc * H * W;
      T* dst = out.data() + nc * (H + 2 * p) * (W + 2 * p);
      for (std::int64_t h = 0; h < H + 2 * p; ++h) {
        const std::int64_t ih = reflect(h - p, H);
        for (std::int64_t w = 0; w < W + 2 * p; ++w) {
          dst[h * (W + 2 * p) + w] = src[ih * W + reflect(w - p, W)];
        }
      }
    }
    return attach(std::move(out), {x}, [x, p, N, C, H, W, reflect](Graph& g, int self) {
      if (!g.requires_grad(x)) return;
      const T* go = g.grad(self).data();
      T* gx = g.grad_buffer(x).data();
      for (std::int64_t nc = 0; nc < N * C; ++nc) {
        const T* src = go + nc * (H + 2 * p) * (W + 2 * p);
        T* dst = gx + nc * H * W;
        for (std::int64_t h = 0; h < H + 2 * p; ++h) {
          const std::int64_t ih = reflect(h - p, H);
          for (std::int64_t w = 0; w < W + 2 * p; ++w) {
            dst[ih * W + reflect(w - p, W)] += src[h * (W + 2 * p) + w];
          }
        }
      }
    });
  }

  // ---- convolutions ----

  struct ConvGeom {
    std::int64_t C, H, W;  // the larger-resolution side
    std::int64_t R, S, stride, pad;
    std::int64_t OH, OW;   // the smaller-resolution side
  };

  int conv2d(int x, int w, int b, std::int64_t stride, std::int64_t pad) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& wv = value(w);
    check(xv.ndim() == 4 && wv.ndim() == 4, "conv2d: expected NCHW input and KCRS weight");
    const std::int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const std::int64_t K = wv.dim(0), R = wv.dim(2), S = wv.dim(3);
    check(wv.dim(1) == C, "conv2d: channel mismatch");
    const std::int64_t OH = (H + 2 * pad - R) / stride + 1;
    const std::int64_t OW = (W + 2 * pad - S) / stride + 1;
    check(OH > 0 && OW > 0, "conv2d: output would be empty");
    const ConvGeom geom{C, H, W, R, S, stride, pad, OH, OW};

    Tensor<T> out({N, K, OH, OW});
    std::vector<T> col(static_cast<size_t>(C * R * S) * OH * OW);
    CMapM wm(wv.data(), K, C * R * S);
    for (std::int64_t n = 0; n < N; ++n) {
      im2col(xv.data() + n * C * H * W, geom, col.data());
      CMapM cm(col.data(), C * R * S, OH * OW);
      MapM ym(out.data() + n * K * OH * OW, K, OH * OW);
      ym.noalias() = wm * cm;
    }
    if (b >= 0) add_channel_bias(out, value(b));

    return attach(std::move(out), {x, w, b}, [x, w, b, geom, N, K](Graph& g, int self) {
      const Tensor<T>& xv2 = g.value(x);
      const Tensor<T>& wv2 = g.value(w);
      const Tensor<T>& go = g.grad(self);
      const std::int64_t CRS = geom.C * geom.R * geom.S;
      const std::int64_t OHW = geom.OH * geom.OW;
      std::vector<T> col(static_cast<size_t>(CRS) * OHW);
      std::vector<T> dcol(static_cast<size_t>(CRS) * OHW);
      CMapM wm(wv2.data(), K, CRS);
      const bool need_x = g.requires_grad(x);
      const bool need_w = g.requires_grad(w);
      const bool need_b = b >= 0 && g.requires_grad(b);
      for (std::int64_t n = 0; n < N; ++n) {
        CMapM dym(go.data() + n * K * OHW, K, OHW);
        if (need_w) {
          im2col(xv2.data() + n * geom.C * geom.H * geom.W, geom, col.data());
          CMapM cm(col.data(), CRS, OHW);
          MapM dwm(g.grad_buffer(w).data(), K, CRS);
          dwm.noalias() += dym * cm.transpose();
        }
        if (need_x) {
          MapM dcm(dcol.data(), CRS, OHW);
          dcm.noalias() = wm.transpose() * dym;
          col2im(dcol.data(), geom,
                 g.grad_buffer(x).data() + n * geom.C * geom.H * geom.W);
        }
        if (need_b) {
          T* db = g.grad_buffer(b).data();
          for (std::int64_t k = 0; k < K; ++k) db[k] += dym.row(k).sum();
        }
      }
    });
  }

  // Transposed convolution; weight layout (Cin, Cout, R, S); out_pad < stride.
  int conv_transpose2d(int x, int w, int b, std::int64_t stride, std::int64_t pad,
                       std::int64_t out_pad) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& wv = value(w);
    check(xv.ndim() == 4 && wv.ndim() == 4, "conv_transpose2d: bad ranks");
    const std::int64_t N = xv.dim(0), Cin = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    check(wv.dim(0) == Cin, "conv_transpose2d: channel mismatch");
    const std::int64_t Cout = wv.dim(1), R = wv.dim(2), S = wv.dim(3);
    check(out_pad >= 0 && out_pad < stride, "conv_transpose2d: invalid output padding");
    const std::int64_t HB = (H - 1) * stride - 2 * pad + R + out_pad;
    const std::int64_t WB = (W - 1) * stride - 2 * pad + S + out_pad;
    check(HB > 0 && WB > 0, "conv_transpose2d: output would be empty");
    const ConvGeom geom{Cout, HB, WB, R, S, stride, pad, H, W};

    Tensor<T> out({N, Cout, HB, WB});
    std::vector<T> col(static_cast<size_t>(Cout * R * S) * H * W);
    CMapM wm(wv.data(), Cin, Cout * R * S);
    for (std::int64_t n = 0; n < N; ++n) {
      CMapM xm(xv.data() + n * Cin * H * W, Cin, H * W);
      MapM cm(col.data(), Cout * R * S, H * W);
      cm.noalias() = wm.transpose() * xm;
      col2im(col.data(), geom, out.data() + n * Cout * HB * WB);
    }
    if (b >= 0) add_channel_bias(out, value(b));

    return attach(std::move(out), {x, w, b},
                  [x, w, b, geom, N, Cin](Graph& g, int self) {
      const Tensor<T>& xv2 = g.value(x);
      const Tensor<T>& wv2 = g.value(w);
      const Tensor<T>& go = g.grad(self);
      const std::int64_t CRS = geom.C * geom.R * geom.S;  // Cout*R*S
      const std::int64_t HW = geom.OH * geom.OW;
      std::vector<T> dcol(static_cast<size_t>(CRS) * HW);
      CMapM wm(wv2.data(), Cin, CRS);
      const bool need_x = g.requires_grad(x);
      const bool need_w = g.requires_grad(w);
      const bool need_b = b >= 0 && g.requires_grad(b);
      for (std::int64_t n = 0; n < N; ++n) {
        im2col(go.data() + n * geom.C * geom.H * geom.W, geom, dcol.data());
        CMapM dcm(dcol.data(), CRS, HW);
        if (need_x) {
          MapM dxm(g.grad_buffer(x).data() + n * Cin * HW, Cin, HW);
          dxm.noalias() += wm * dcm;
        }
        if (need_w) {
          CMapM xm(xv2.data() + n * Cin * HW, Cin, HW);
          MapM dwm(g.grad_buffer(w).data(), Cin, CRS);
          dwm.noalias() += xm * dcm.transpose();
        }
        if (need_b) {
          T* db = g.grad_buffer(b).data();
          const T* src = go.data() + n * geom.C * geom.H * geom.W;
          for (std::int64_t c = 0; c < geom.C; ++c) {
            T acc{};
            for (std::int64_t i = 0; i < geom.H * geom.W; ++i) acc += src[c * geom.H * geom.W + i];
            db[c] += acc;
          }
        }
      }
    });
  }

  // ---- normalization ----

  int instance_norm(int x, int gamma, int beta, T eps = T(1e-5)) {
    const Tensor<T>& xv = value(x);
    check(xv.ndim() == 4, "instance_norm: expected NCHW");
    const std::int64_t N = xv.dim(0), C = xv.dim(1), M = xv.dim(2) * xv.dim(3);
    check(value(gamma).numel() == C && value(beta).numel() == C,
          "instance_norm: affine parameter size mismatch");
    check(M > 1, "instance_norm: spatial size must exceed 1");

    auto stats = std::make_shared<std::vector<T>>(2 * N * C);  // mean, invstd
    Tensor<T> out(xv.shape());
    const T* gv = value(gamma).data();
    const T* bv = value(beta).data();
    for (std::int64_t nc = 0; nc < N * C; ++nc) {
      const T* src = xv.data() + nc * M;
      T mean{}, var{};
      for (std::int64_t i = 0; i < M; ++i) mean += src[i];
      mean /= static_cast<T>(M);
      for (std::int64_t i = 0; i < M; ++i) {
        const T d = src[i] - mean;
        var += d * d;
      }
      var /= static_cast<T>(M);
      const T invstd = T(1) / std::sqrt(var + eps);
      (*stats)[2 * nc] = mean;
      (*stats)[2 * nc + 1] = invstd;
      const std::int64_t c = nc % C;
      T* dst = out.data() + nc * M;
      for (std::int64_t i = 0; i < M; ++i) {
        dst[i] = gv[c] * (src[i] - mean) * invstd + bv[c];
      }
    }

    return attach(std::move(out), {x, gamma, beta},
                  [x, gamma, beta, stats, N, C, M](Graph& g, int self) {
      norm_backward(g, self, x, gamma, beta, *stats,
                    /*group_is_channel=*/false, N, C, M);
    });
  }

  // Batch normalization over (N, H, W) per channel. In training mode the
  // running statistics are updated in place (momentum convention: new = (1 -
  // momentum) * old + momentum * batch).
  int batch_norm(int x, int gamma, int beta, Parameter<T>& running_mean,
                 Parameter<T>& running_var, bool training, T momentum = T(0.1),
                 T eps = T(1e-5)) {
    const Tensor<T>& xv = value(x);
    check(xv.ndim() == 4, "batch_norm: expected NCHW");
    const std::int64_t N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    const std::int64_t M = N * HW;
    check(value(gamma).numel() == C && value(beta).numel() == C,
          "batch_norm: affine parameter size mismatch");
    check(!training || M > 1, "batch_norm: batch too small for training statistics");

    auto stats = std::make_shared<std::vector<T>>(2 * C);  // mean, invstd per channel
    for (std::int64_t c = 0; c < C; ++c) {
      T mean{}, var{};
      if (training) {
        for (std::int64_t n = 0; n < N; ++n) {
          const T* src = xv.data() + (n * C + c) * HW;
          for (std::int64_t i = 0; i < HW; ++i) mean += src[i];
        }
        mean /= static_cast<T>(M);
        for (std::int64_t n = 0; n < N; ++n) {
          const T* src = xv.data() + (n * C + c) * HW;
          for (std::int64_t i = 0; i < HW; ++i) {
            const T d = src[i] - mean;
            var += d * d;
          }
        }
        var /= static_cast<T>(M);
        const T unbiased = var * static_cast<T>(M) / static_cast<T>(M - 1);
        running_mean.value.raw()[c] =
            (T(1) - momentum) * running_mean.value.raw()[c] + momentum * mean;
        running_var.value.raw()[c] =
            (T(1) - momentum) * running_var.value.raw()[c] + momentum * unbiased;
      } else {
        mean = running_mean.value.raw()[c];
        var = running_var.value.raw()[c];
      }
      (*stats)[2 * c] = mean;
      (*stats)[2 * c + 1] = T(1) / std::sqrt(var + eps);
    }

    Tensor<T> out(xv.shape());
    const T* gv = value(gamma).data();
    const T* bv = value(beta).data();
    for (std::int64_t n = 0; n < N; ++n) {
      for (std::int64_t c = 0; c < C; ++c) {
        const T mean = (*stats)[2 * c];
        const T invstd = (*stats)[2 * c + 1];
        const T* src = xv.data() + (n * C + c) * HW;
        T* dst = out.data() + (n * C + c) * HW;
        for (std::int64_t i = 0; i < HW; ++i) {
          dst[i] = gv[c] * (src[i] - mean) * invstd + bv[c];
        }
      }
    }

    if (training) {
      return attach(std::move(out), {x, gamma, beta},
                    [x, gamma, beta, stats, N, C, HW](Graph& g, int self) {
        norm_backward(g, self, x, gamma, beta, *stats,
                      /*group_is_channel=*/true, N, C, HW);
      });
    }
    // Eval mode treats mean/var as constants.
    return attach(std::move(out), {x, gamma, beta},
                  [x, gamma, beta, stats, N, C, HW](Graph& g, int self) {
      const Tensor<T>& xv2 = g.value(x);
      const Tensor<T>& go = g.grad(self);
      const T* gv2 = g.value(gamma).data();
      const bool need_x = g.requires_grad(x);
      const bool need_g = g.requires_grad(gamma);
      const bool need_b = g.requires_grad(beta);
      for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t c = 0; c < C; ++c) {
          const T mean = (*stats)[2 * c];
          const T invstd = (*stats)[2 * c + 1];
          const T* dy = go.data() + (n * C + c) * HW;
          const T* src = xv2.data() + (n * C + c) * HW;
          if (need_x) {
            T* dx = g.grad_buffer(x).data() + (n * C + c) * HW;
            for (std::int64_t i = 0; i < HW; ++i) dx[i] += dy[i] * gv2[c] * invstd;
          }
          if (need_g) {
            T acc{};
            for (std::int64_t i = 0; i < HW; ++i) acc += dy[i] * (src[i] - mean) * invstd;
            g.grad_buffer(gamma).raw()[c] += acc;
          }
          if (need_b) {
            T acc{};
            for (std::int64_t i = 0; i < HW; ++i) acc += dy[i];
            g.grad_buffer(beta).raw()[c] += acc;
          }
        }
      }
    });
  }

  // ---- pooling ----

  int max_pool2(int x) {
    const Tensor<T>& xv = value(x);
    check(xv.ndim() == 4, "max_pool2: expected NCHW");
    const std::int64_t N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    check(H % 2 == 0 && W % 2 == 0, "max_pool2: spatial extents must be even");
    const std::int64_t OH = H / 2, OW = W / 2;
    Tensor<T> out({N, C, OH, OW});
    auto argmax = std::make_shared<std::vector<std::int32_t>>(out.numel());
    for (std::int64_t nc = 0; nc < N * C; ++nc) {
      const T* src = xv.data() + nc * H * W;
      T* dst = out.data() + nc * OH * OW;
      std::int32_t* am = argmax->data() + nc * OH * OW;
      for (std::int64_t oh = 0; oh < OH; ++oh) {
        for (std::int64_t ow = 0; ow < OW; ++ow) {
          std::int64_t best = (2 * oh) * W + 2 * ow;
          for (const std::int64_t off : {std::int64_t(1), W, W + 1}) {
            const std::int64_t idx = (2 * oh) * W + 2 * ow + off;
            if (src[idx] > src[best]) best = idx;
          }
          dst[oh * OW + ow] = src[best];
          am[oh * OW + ow] = static_cast<std::int32_t>(best);
        }
      }
    }
    return attach(std::move(out), {x}, [x, argmax, N, C, H, W](Graph& g, int self) {
      if (!g.requires_grad(x)) return;
      const Tensor<T>& go = g.grad(self);
      T* gx = g.grad_buffer(x).data();
      const std::int64_t OHW = (H / 2) * (W / 2);
      for (std::int64_t nc = 0; nc < N * C; ++nc) {
        const T* dy = go.data() + nc * OHW;
        const std::int32_t* am = argmax->data() + nc * OHW;
        T* dst = gx + nc * H * W;
        for (std::int64_t i = 0; i < OHW; ++i) dst[am[i]] += dy[i];
      }
    });
  }

  // ---- backward ----

  void backward(int root) {
    check(value(root).numel() == 1, "backward: root must be scalar");
    grad_buffer(root).raw()[0] = T(1);
    for (int id = root; id >= 0; --id) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (!n.grad.defined() || !n.backward || !n.requires_grad) continue;
      n.backward(*this, id);
    }
    for (const int id : param_leaves_) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (!n.grad.defined()) continue;
      auto& pg = n.param->grad.raw();
      const auto& g = n.grad.raw();
      for (size_t i = 0; i < pg.size(); ++i) pg[i] += g[i];
    }
  }

  Tensor<T>& grad_buffer(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad.defined()) n.grad = Tensor<T>(n.value.shape());
    return n.grad;
  }

  size_t size() const { return nodes_.size(); }

 private:
  int attach(Tensor<T> out, std::initializer_list<int> parents, BackwardFn fn) {
    bool req = false;
    for (const int p : parents) {
      if (p >= 0 && requires_grad(p)) req = true;
    }
    Node n;
    n.value = std::move(out);
    n.requires_grad = req;
    if (req) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  template <typename F, typename G>
  int unary(int a, F fwd, G bwd) {
    const Tensor<T>& x = value(a);
    Tensor<T> out(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) out.raw()[i] = fwd(x.raw()[i]);
    return attach(std::move(out), {a}, [a, bwd](Graph& g, int self) {
      if (!g.requires_grad(a)) return;
      const Tensor<T>& x2 = g.value(a);
      const Tensor<T>& y2 = g.value(self);
      const Tensor<T>& go = g.grad(self);
      Tensor<T>& gx = g.grad_buffer(a);
      for (std::int64_t i = 0; i < x2.numel(); ++i) {
        gx.raw()[i] += bwd(x2.raw()[i], y2.raw()[i], go.raw()[i]);
      }
    });
  }

  template <typename F, typename G>
  int binary(int a, int b, F fwd, G bwd) {
    const Tensor<T>& x = value(a);
    const Tensor<T>& y = value(b);
    check(x.same_shape(y), "elementwise op: shape mismatch " +
                               Tensor<T>::shape_str(x.shape()) + " vs " +
                               Tensor<T>::shape_str(y.shape()));
    Tensor<T> out(x.shape());
    for (std::int64_t i = 0; i < x.numel(); ++i) {
      out.raw()[i] = fwd(x.raw()[i], y.raw()[i]);
    }
    return attach(std::move(out), {a, b}, [a, b, bwd](Graph& g, int self) {
      const Tensor<T>& x2 = g.value(a);
      const Tensor<T>& y2 = g.value(b);
      const Tensor<T>& go = g.grad(self);
      const bool need_a = g.requires_grad(a);
      const bool need_b = g.requires_grad(b);
      T* ga = need_a ? g.grad_buffer(a).data() : nullptr;
      T* gb = need_b ? g.grad_buffer(b).data() : nullptr;
      for (std::int64_t i = 0; i < x2.numel(); ++i) {
        const auto [da, db] = bwd(x2.raw()[i], y2.raw()[i], go.raw()[i]);
        if (need_a) ga[i] += da;
        if (need_b) gb[i] += db;
      }
    });
  }

  static void add_channel_bias(Tensor<T>& y, const Tensor<T>& bias) {
    const std::int64_t N = y.dim(0), C = y.dim(1), HW = y.dim(2) * y.dim(3);
    check(bias.numel() == C, "bias: size mismatch");
    for (std::int64_t n = 0; n < N; ++n) {
      for (std::int64_t c = 0; c < C; ++c) {
        T* dst = y.data() + (n * C + c) * HW;
        const T b = bias.raw()[c];
        for (std::int64_t i = 0; i < HW; ++i) dst[i] += b;
      }
    }
  }

  static void im2col(const T* img, const ConvGeom& g, T* col) {
    const std::int64_t OHW = g.OH * g.OW;
    for (std::int64_t c = 0; c < g.C; ++c) {
      for (std::int64_t r = 0; r < g.R; ++r) {
        for (std::int64_t s = 0; s < g.S; ++s) {
          T* dst = col + ((c * g.R + r) * g.S + s) * OHW;
          for (std::int64_t oh = 0; oh < g.OH; ++oh) {
            const std::int64_t ih = oh * g.stride - g.pad + r;
            if (ih < 0 || ih >= g.H) {
              for (std::int64_t ow = 0; ow < g.OW; ++ow) dst[oh * g.OW + ow] = T{};
              continue;
            }
            const T* src = img + (c * g.H + ih) * g.W;
            for (std::int64_t ow = 0; ow < g.OW; ++ow) {
              const std::int64_t iw = ow * g.stride - g.pad + s;
              dst[oh * g.OW + ow] = (iw >= 0 && iw < g.W) ? src[iw] : T{};
            }
          }
        }
      }
    }
  }

  // Scatter-add of a column buffer back onto the image grid.
  static void col2im(const T* col, const ConvGeom& g, T* img) {
    const std::int64_t OHW = g.OH * g.OW;
    for (std::int64_t c = 0; c < g.C; ++c) {
      for (std::int64_t r = 0; r < g.R; ++r) {
        for (std::int64_t s = 0; s < g.S; ++s) {
          const T* src = col + ((c * g.R + r) * g.S + s) * OHW;
          for (std::int64_t oh = 0; oh < g.OH; ++oh) {
            const std::int64_t ih = oh * g.stride - g.pad + r;
            if (ih < 0 || ih >= g.H) continue;
            T* dst = img + (c * g.H + ih) * g.W;
            for (std::int64_t ow = 0; ow < g.OW; ++ow) {
              const std::int64_t iw = ow * g.stride - g.pad + s;
              if (iw >= 0 && iw < g.W) dst[iw] += src[oh * g.OW + ow];
            }
          }
        }
      }
    }
  }

  // Shared backward for instance/batch norm. stats holds (mean, invstd) per
  // group; a group is one (n, c) slice for instance norm (group_is_channel =
  // false, M spatial elements) or one channel across the batch for batch norm
  // (group_is_channel = true, N * HW elements).
  static void norm_backward(Graph& g, int self, int x, int gamma, int beta,
                            const std::vector<T>& stats, bool group_is_channel,
                            std::int64_t N, std::int64_t C, std::int64_t HW) {
    const Tensor<T>& xv = g.value(x);
    const Tensor<T>& go = g.grad(self);
    const T* gv = g.value(gamma).data();
    const bool need_x = g.requires_grad(x);
    const bool need_g = g.requires_grad(gamma);
    const bool need_b = g.requires_grad(beta);

    const std::int64_t groups = group_is_channel ? C : N * C;
    const std::int64_t M = group_is_channel ? N * HW : HW;
    for (std::int64_t grp = 0; grp < groups; ++grp) {
      const std::int64_t c = group_is_channel ? grp : grp % C;
      const T mean = stats[2 * grp];
      const T invstd = stats[2 * grp + 1];

      // First pass: Σdy and Σdy·xhat over the group.
      T sum_dy{}, sum_dy_xhat{};
      const std::int64_t slices = group_is_channel ? N : 1;
      for (std::int64_t sl = 0; sl < slices; ++sl) {
        const std::int64_t base =
            group_is_channel ? (sl * C + c) * HW : grp * HW;
        const T* dy = go.data() + base;
        const T* src = xv.data() + base;
        for (std::int64_t i = 0; i < HW; ++i) {
          sum_dy += dy[i];
          sum_dy_xhat += dy[i] * (src[i] - mean) * invstd;
        }
      }
      if (need_g) g.grad_buffer(gamma).raw()[c] += sum_dy_xhat;
      if (need_b) g.grad_buffer(beta).raw()[c] += sum_dy;
      if (!need_x) continue;

      const T k = gv[c] * invstd / static_cast<T>(M);
      for (std::int64_t sl = 0; sl < slices; ++sl) {
        const std::int64_t base =
            group_is_channel ? (sl * C + c) * HW : grp * HW;
        const T* dy = go.data() + base;
        const T* src = xv.data() + base;
        T* dx = g.grad_buffer(x).data() + base;
        for (std::int64_t i = 0; i < HW; ++i) {
          const T xhat = (src[i] - mean) * invstd;
          dx[i] += k * (static_cast<T>(M) * dy[i] - sum_dy - xhat * sum_dy_xhat);
        }
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<int> param_leaves_;
};

using GraphF = Graph<float>;
using GraphD = Graph<double>;

}  // namespace xmodseg::nn
