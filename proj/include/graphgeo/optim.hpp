#pragma once

#include <cstdint>
#include <functional>

#include "graphgeo/tensor.hpp"

namespace graphgeo {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter moment buffers; shapes follow the parameter lazily.
struct AdamState {
  Tensor m;
  Tensor v;
  std::int64_t t = 0;
};

// One bias-corrected Adam update. The L2 term of the objective enters as an
// explicit 2*weight_decay*param added to the gradient before the moment
// updates; pass weight_decay 0 for parameters outside the penalty.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state,
               const AdamConfig& cfg, double lr, double weight_decay);

// Central finite differences of a scalar function.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double eps = 1e-4);

// max over coordinates of |a - n| / max(1, |a|, |n|).
double max_relative_error(const Tensor& analytic, const Tensor& numeric);

double grad_check(const std::function<double(const Tensor&)>& f, const Tensor& x,
                  const Tensor& analytic, double eps = 1e-4);

} // namespace graphgeo
