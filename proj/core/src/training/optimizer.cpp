#include "eegclip/training/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "eegclip/error.hpp"

namespace eegclip::train {

void adamw_step(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                std::uint64_t t, double lr, const AdamWConfig& cfg) {
  if (t == 0) throw Error(ErrorCode::kInvalidArgument, "adamw_step: step count starts at 1");
  if (m.size() != param.size() || v.size() != param.size() || (!grad.empty() && grad.size() != param.size())) {
    throw Error(ErrorCode::kShapeMismatch, "adamw_step: parameter, gradient and state sizes differ");
  }
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad.empty() ? 0.0 : grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * param[i]);
  }
}

AdamW::AdamW(ad::ParameterStore& store, AdamWConfig cfg) : store_(store), cfg_(cfg) {
  for (const auto& p : store_.parameters()) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void AdamW::step(double lr) {
  const auto& params = store_.parameters();
  if (params.size() != m_.size()) throw Error(ErrorCode::kShapeMismatch, "AdamW: parameter store changed size");
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor t = params[i].tensor;
    adamw_step(t.mutable_values(), t.grad(), m_[i], v_[i], t_, lr, cfg_);
  }
  store_.set_step(store_.step() + 1);
}

double cosine_lr(std::size_t t, double lr0, double lr_min, std::size_t max_epochs) {
  if (max_epochs == 0 || t > max_epochs) {
    throw Error(ErrorCode::kInvalidArgument, "cosine_lr: epoch " + std::to_string(t) + " outside [0, " +
                                                 std::to_string(max_epochs) + "]");
  }
  return lr_min + 0.5 * (lr0 - lr_min) *
                      (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / static_cast<double>(max_epochs)));
}

}  // namespace eegclip::train
