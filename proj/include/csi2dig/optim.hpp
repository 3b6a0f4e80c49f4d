#pragma once

#include <cmath>
#include <cstdint>

#include "csi2dig/errors.hpp"
#include "csi2dig/tensor.hpp"

namespace csi2dig {

struct TrainConfig {
  double learning_rate = 0.001;
  double weight_decay = 0.03;
  double dropout_p = 0.5;
  int epochs = 800;
  int batch_size = 32;
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Decoupled decay (theta *= 1 - lr*wd before the Adam update) by default;
  // coupled adds wd*theta to the gradient instead.
  bool coupled_weight_decay = false;

  void validate() const {
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail(Errc::bad_config, "dropout_p must be in [0, 1)");
    if (epochs < 0) fail(Errc::bad_config, "epochs must be >= 0");
    if (batch_size < 1) fail(Errc::bad_config, "batch_size must be >= 1");
    if (!(learning_rate > 0.0)) fail(Errc::bad_config, "learning_rate must be positive");
    if (weight_decay < 0.0) fail(Errc::bad_config, "weight_decay must be >= 0");
  }
};

// Standard Adam with bias correction.
template <typename T>
void adam_step(ParamSet<T>& params, const TrainConfig& cfg) {
  params.step += 1;
  double t = static_cast<double>(params.step);
  double corr1 = 1.0 - std::pow(cfg.adam_beta1, t);
  double corr2 = 1.0 - std::pow(cfg.adam_beta2, t);
  T b1 = T(cfg.adam_beta1), b2 = T(cfg.adam_beta2);
  T lr = T(cfg.learning_rate), eps = T(cfg.adam_eps);
  T decay = T(1.0 - cfg.learning_rate * cfg.weight_decay);

  for (auto& [name, slot] : params.slots) {
    T* w = slot.value.ptr();
    T* g = slot.grad.ptr();
    T* m = slot.m.ptr();
    T* v = slot.v.ptr();
    size_t n = slot.value.size();
    for (size_t i = 0; i < n; ++i) {
      T grad = g[i];
      if (cfg.coupled_weight_decay)
        grad += T(cfg.weight_decay) * w[i];
      else
        w[i] *= decay;
      m[i] = b1 * m[i] + (T(1) - b1) * grad;
      v[i] = b2 * v[i] + (T(1) - b2) * grad * grad;
      T mhat = T(static_cast<double>(m[i]) / corr1);
      T vhat = T(static_cast<double>(v[i]) / corr2);
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace csi2dig
