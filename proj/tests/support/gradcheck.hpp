#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "xmodseg/nn/graph.hpp"
#include "xmodseg/nn/parameter.hpp"

namespace xmodseg::testing {

// Central finite differences against reverse-mode gradients, 64-bit.
// build_loss must construct a fresh graph from the current parameter values
// and return the scalar loss node. Checks at most max_elems leading elements
// per parameter.
struct GradCheckResult {
  double max_rel_err = 0.0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline GradCheckResult gradcheck(
    std::vector<nn::Parameter<double>*> params,
    const std::function<int(nn::Graph<double>&)>& build_loss, double h = 1e-5,
    std::int64_t max_elems = 64) {
  const auto eval = [&]() {
    nn::Graph<double> g;
    const int loss = build_loss(g);
    return g.value(loss).item();
  };

  for (auto* p : params) p->zero_grad();
  {
    nn::Graph<double> g;
    const int loss = build_loss(g);
    g.backward(loss);
  }

  GradCheckResult result;
  for (auto* p : params) {
    const std::int64_t n = std::min<std::int64_t>(max_elems, p->value.numel());
    for (std::int64_t i = 0; i < n; ++i) {
      double& x = p->value.raw()[static_cast<size_t>(i)];
      const double saved = x;
      x = saved + h;
      const double fp = eval();
      x = saved - h;
      const double fm = eval();
      x = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = p->grad.raw()[static_cast<size_t>(i)];
      const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
      const double rel = std::abs(numeric - analytic) / denom;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

// Gradient of a loss with respect to a non-parameter graph input.
inline GradCheckResult gradcheck_input(
    nn::Tensor<double>& input,
    const std::function<int(nn::Graph<double>&, int)>& build_loss, double h = 1e-5,
    std::int64_t max_elems = 64) {
  nn::Parameter<double> wrapper("input", input);
  auto build = [&](nn::Graph<double>& g) {
    return build_loss(g, g.param(wrapper));
  };
  auto result = gradcheck({&wrapper}, build, h, max_elems);
  return result;
}

}  // namespace xmodseg::testing
