#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eegclip/autodiff/parameters.hpp"

namespace eegclip::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.003;
};

/// One AdamW update of a single tensor at step t >= 1 (decoupled decay):
/// p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p).
void adamw_step(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                std::uint64_t t, double lr, const AdamWConfig& cfg);

/// AdamW over every tensor of a store. A parameter without a gradient is
/// updated as if its gradient were zero.
class AdamW {
 public:
  AdamW(ad::ParameterStore& store, AdamWConfig cfg);

  void step(double lr);
  std::uint64_t steps() const { return t_; }

 private:
  ad::ParameterStore& store_;
  AdamWConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// lr_min + (lr0 - lr_min) * (1 + cos(pi * t / max_epochs)) / 2 for 0 <= t <= max_epochs.
double cosine_lr(std::size_t t, double lr0, double lr_min, std::size_t max_epochs);

}  // namespace eegclip::train
