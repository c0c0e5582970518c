#include "graphgeo/optim.hpp"

#include <cmath>

#include "graphgeo/errors.hpp"

namespace graphgeo {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state,
               const AdamConfig& cfg, double lr, double weight_decay) {
  if (!param.same_shape(grad)) throw DimensionError("adam_step: grad shape mismatch");
  if (state.t == 0) {
    state.m = Tensor::zeros(param.shape());
    state.v = Tensor::zeros(param.shape());
  }
  if (!state.m.same_shape(param)) throw DimensionError("adam_step: state shape mismatch");

  state.t += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    double g = grad[i] + 2.0 * weight_decay * param[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double eps) {
  Tensor grad = Tensor::zeros(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = probe[i];
    probe[i] = orig + eps;
    double hi = f(probe);
    probe[i] = orig - eps;
    double lo = f(probe);
    probe[i] = orig;
    grad[i] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

double max_relative_error(const Tensor& analytic, const Tensor& numeric) {
  if (!analytic.same_shape(numeric))
    throw DimensionError("max_relative_error: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double a = analytic[i], n = numeric[i];
    double denom = std::max({1.0, std::abs(a), std::abs(n)});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

double grad_check(const std::function<double(const Tensor&)>& f, const Tensor& x,
                  const Tensor& analytic, double eps) {
  return max_relative_error(analytic, finite_difference_gradient(f, x, eps));
}

} // namespace graphgeo
