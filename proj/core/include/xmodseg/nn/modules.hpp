#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "xmodseg/core/rng.hpp"
#include "xmodseg/nn/graph.hpp"
#include "xmodseg/nn/parameter.hpp"

namespace xmodseg::nn {

// Parameters are initialized from an RNG stream derived from (network seed,
// parameter name), so two builds with one seed are identical regardless of
// construction order.
template <typename T>
Tensor<T> kaiming_normal(const std::vector<std::int64_t>& shape, std::int64_t fan_in,
                         double gain, std::uint64_t seed, const std::string& name) {
  Rng rng(Rng::derive(seed, name));
  Tensor<T> t(shape);
  const double stddev = gain / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.raw()) v = static_cast<T>(rng.normal(0.0, stddev));
  return t;
}

template <typename T>
class ModuleBase {
 public:
  virtual ~ModuleBase() = default;

  virtual void append_params(std::vector<Parameter<T>*>& out) = 0;

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> all;
    append_params(all);
    std::vector<Parameter<T>*> unique;
    std::unordered_set<Parameter<T>*> seen;
    for (auto* p : all) {
      if (seen.insert(p).second) unique.push_back(p);
    }
    return unique;
  }
};

template <typename T>
class Conv2d : public ModuleBase<T> {
 public:
  Conv2d(const std::string& name, std::uint64_t seed, std::int64_t in_ch,
         std::int64_t out_ch, std::int64_t kernel, std::int64_t stride, std::int64_t pad,
         double gain = std::sqrt(2.0))
      : stride_(stride),
        pad_(pad),
        weight_(std::make_unique<Parameter<T>>(
            name + ".weight",
            kaiming_normal<T>({out_ch, in_ch, kernel, kernel}, in_ch * kernel * kernel,
                              gain, seed, name + ".weight"))),
        bias_(std::make_unique<Parameter<T>>(name + ".bias",
                                             Tensor<T>({out_ch}))) {}

  int forward(Graph<T>& g, int x) {
    return g.conv2d(x, g.param(*weight_), g.param(*bias_), stride_, pad_);
  }

  void append_params(std::vector<Parameter<T>*>& out) override {
    out.push_back(weight_.get());
    out.push_back(bias_.get());
  }

 private:
  std::int64_t stride_, pad_;
  std::unique_ptr<Parameter<T>> weight_, bias_;
};

template <typename T>
class ConvTranspose2d : public ModuleBase<T> {
 public:
  ConvTranspose2d(const std::string& name, std::uint64_t seed, std::int64_t in_ch,
                  std::int64_t out_ch, std::int64_t kernel, std::int64_t stride,
                  std::int64_t pad, std::int64_t out_pad, double gain = std::sqrt(2.0))
      : stride_(stride),
        pad_(pad),
        out_pad_(out_pad),
        weight_(std::make_unique<Parameter<T>>(
            name + ".weight",
            kaiming_normal<T>({in_ch, out_ch, kernel, kernel}, in_ch * kernel * kernel,
                              gain, seed, name + ".weight"))),
        bias_(std::make_unique<Parameter<T>>(name + ".bias",
                                             Tensor<T>({out_ch}))) {}

  int forward(Graph<T>& g, int x) {
    return g.conv_transpose2d(x, g.param(*weight_), g.param(*bias_), stride_, pad_,
                              out_pad_);
  }

  void append_params(std::vector<Parameter<T>*>& out) override {
    out.push_back(weight_.get());
    out.push_back(bias_.get());
  }

 private:
  std::int64_t stride_, pad_, out_pad_;
  std::unique_ptr<Parameter<T>> weight_, bias_;
};

template <typename T>
class InstanceNorm2d : public ModuleBase<T> {
 public:
  InstanceNorm2d(const std::string& name, std::int64_t channels)
      : gamma_(std::make_unique<Parameter<T>>(name + ".gamma",
                                              Tensor<T>({channels}, T(1)))),
        beta_(std::make_unique<Parameter<T>>(name + ".beta", Tensor<T>({channels}))) {}

  int forward(Graph<T>& g, int x) {
    return g.instance_norm(x, g.param(*gamma_), g.param(*beta_));
  }

  void append_params(std::vector<Parameter<T>*>& out) override {
    out.push_back(gamma_.get());
    out.push_back(beta_.get());
  }

 private:
  std::unique_ptr<Parameter<T>> gamma_, beta_;
};

template <typename T>
class BatchNorm2d : public ModuleBase<T> {
 public:
  BatchNorm2d(const std::string& name, std::int64_t channels)
      : gamma_(std::make_unique<Parameter<T>>(name + ".gamma",
                                              Tensor<T>({channels}, T(1)))),
        beta_(std::make_unique<Parameter<T>>(name + ".beta", Tensor<T>({channels}))),
        running_mean_(std::make_unique<Parameter<T>>(name + ".running_mean",
                                                     Tensor<T>({channels}), false)),
        running_var_(std::make_unique<Parameter<T>>(name + ".running_var",
                                                    Tensor<T>({channels}, T(1)), false)) {}

  int forward(Graph<T>& g, int x, bool training) {
    return g.batch_norm(x, g.param(*gamma_), g.param(*beta_), *running_mean_,
                        *running_var_, training);
  }

  void append_params(std::vector<Parameter<T>*>& out) override {
    out.push_back(gamma_.get());
    out.push_back(beta_.get());
    out.push_back(running_mean_.get());
    out.push_back(running_var_.get());
  }

 private:
  std::unique_ptr<Parameter<T>> gamma_, beta_, running_mean_, running_var_;
};

enum class Norm { none, instance, batch };

// Conv -> norm -> activation block, the unit all the networks here are
// assembled from. Activation choices cover the whole corpus.
enum class Act { none, relu, lrelu, tanh, sigmoid };

template <typename T>
int apply_act(Graph<T>& g, int x, Act act) {
  switch (act) {
    case Act::none: return x;
    case Act::relu: return g.relu(x);
    case Act::lrelu: return g.leaky_relu(x, T(0.2));
    case Act::tanh: return g.tanh(x);
    case Act::sigmoid: return g.sigmoid(x);
  }
  return x;
}

template <typename T>
class ConvBlock : public ModuleBase<T> {
 public:
  ConvBlock(const std::string& name, std::uint64_t seed, std::int64_t in_ch,
            std::int64_t out_ch, std::int64_t kernel, std::int64_t stride,
            std::int64_t pad, Norm norm, Act act, bool transpose = false,
            std::int64_t out_pad = 0)
      : act_(act) {
    const double gain = (act == Act::tanh || act == Act::sigmoid || act == Act::none)
                            ? 1.0
                            : std::sqrt(2.0);
    if (transpose) {
      tconv_ = std::make_unique<ConvTranspose2d<T>>(name, seed, in_ch, out_ch, kernel,
                                                    stride, pad, out_pad, gain);
    } else {
      conv_ = std::make_unique<Conv2d<T>>(name, seed, in_ch, out_ch, kernel, stride,
                                          pad, gain);
    }
    if (norm == Norm::instance) {
      inorm_ = std::make_unique<InstanceNorm2d<T>>(name + ".norm", out_ch);
    } else if (norm == Norm::batch) {
      bnorm_ = std::make_unique<BatchNorm2d<T>>(name + ".norm", out_ch);
    }
  }

  int forward(Graph<T>& g, int x, bool training) {
    int y = conv_ ? conv_->forward(g, x) : tconv_->forward(g, x);
    if (inorm_) y = inorm_->forward(g, y);
    if (bnorm_) y = bnorm_->forward(g, y, training);
    return apply_act(g, y, act_);
  }

  void append_params(std::vector<Parameter<T>*>& out) override {
    if (conv_) conv_->append_params(out);
    if (tconv_) tconv_->append_params(out);
    if (inorm_) inorm_->append_params(out);
    if (bnorm_) bnorm_->append_params(out);
  }

 private:
  Act act_;
  std::unique_ptr<Conv2d<T>> conv_;
  std::unique_ptr<ConvTranspose2d<T>> tconv_;
  std::unique_ptr<InstanceNorm2d<T>> inorm_;
  std::unique_ptr<BatchNorm2d<T>> bnorm_;
};

}  // namespace xmodseg::nn
