#pragma once
// Finite-difference checks shared by the unit tests and the acceptance run.

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eegclip/autodiff/grad_check.hpp"
#include "eegclip/autodiff/ops.hpp"
#include "eegclip/model/emotion_clip.hpp"
#include "eegclip/text/text_bank.hpp"
#include "oracles.hpp"

namespace grad_suite {

using eegclip::ad::Shape;
using eegclip::ad::Tensor;

inline Tensor rand_tensor(Shape shape, std::uint64_t seed, bool grad = true, double lo = -1.0, double hi = 1.0) {
  const auto n = eegclip::ad::numel(shape);
  return Tensor::from_values(std::move(shape), oracle::random_values(n, seed, lo, hi), grad);
}

/// sum(op(x) * w) with a fixed random w so every output coordinate matters.
inline Tensor weighted(const Tensor& y, std::uint64_t seed = 99) {
  return eegclip::ad::sum(eegclip::ad::mul(y, rand_tensor(y.shape(), seed, false)));
}

inline double check(const std::function<Tensor()>& f, Tensor& x) {
  return eegclip::ad::grad_check(f, x).max_relative_error;
}

/// Worst relative error per smooth op, summed over the op's inputs.
inline std::vector<std::pair<std::string, double>> smooth_op_errors() {
  using namespace eegclip::ad;
  auto x = rand_tensor({3, 4}, 30);
  auto y = rand_tensor({3, 4}, 31);
  auto row = rand_tensor({4}, 32);
  auto s = rand_tensor({1}, 33);
  auto w = rand_tensor({4, 5}, 34);
  auto x3 = rand_tensor({2, 3, 4}, 35);
  auto w3 = rand_tensor({2, 4, 2}, 36);
  auto gamma = rand_tensor({4}, 37, true, 0.5, 1.5);
  auto beta = rand_tensor({4}, 38);
  auto img = rand_tensor({2, 2, 5, 5}, 39);
  auto ker = rand_tensor({3, 2, 3, 3}, 40);
  auto bias = rand_tensor({3}, 41);
  auto table = rand_tensor({5, 4}, 42);
  const std::size_t targets[] = {2, 0, 3};
  const std::size_t perm[] = {1, 2, 0};

  std::vector<std::pair<std::string, std::function<double()>>> cases = {
      {"add", [&] { return check([&] { return weighted(add(x, y)); }, x) + check([&] { return weighted(add(x, row)); }, row); }},
      {"sub", [&] { return check([&] { return weighted(sub(x, y)); }, y) + check([&] { return weighted(sub(x, row)); }, row); }},
      {"mul", [&] { return check([&] { return weighted(mul(x, y)); }, x) + check([&] { return weighted(mul(x, row)); }, row); }},
      {"scale", [&] { return check([&] { return weighted(scale(x, -1.7)); }, x); }},
      {"mul_scalar", [&] { return check([&] { return weighted(mul_scalar(x, s)); }, s) + check([&] { return weighted(mul_scalar(x, s)); }, x); }},
      {"exp", [&] { return check([&] { return weighted(exp(x)); }, x); }},
      {"matmul", [&] { return check([&] { return weighted(matmul(x, w)); }, x) + check([&] { return weighted(matmul(x, w)); }, w); }},
      {"matmul_batched", [&] { return check([&] { return weighted(matmul(x3, w3)); }, x3) + check([&] { return weighted(matmul(x3, w3)); }, w3); }},
      {"conv2d", [&] {
         auto f = [&] { return weighted(conv2d(img, ker, bias, {2, 1})); };
         return check(f, img) + check(f, ker) + check(f, bias);
       }},
      {"gelu", [&] { return check([&] { return weighted(gelu(x)); }, x); }},
      {"softmax", [&] { return check([&] { return weighted(softmax(x)); }, x); }},
      {"layer_norm", [&] {
         auto f = [&] { return weighted(layer_norm(x, gamma, beta)); };
         return check(f, x) + check(f, gamma) + check(f, beta);
       }},
      {"mean", [&] { return check([&] { return weighted(mean(x3, 1)); }, x3); }},
      {"concat", [&] {
         return check([&] {
           const Tensor parts[] = {x, y};
           return weighted(concat(parts, 1));
         }, y);
       }},
      {"reshape", [&] { return check([&] { return weighted(reshape(x, {2, 6})); }, x); }},
      {"permute", [&] { return check([&] { return weighted(permute(x3, perm)); }, x3); }},
      {"transpose", [&] { return check([&] { return weighted(transpose(x3)); }, x3); }},
      {"l2_normalize", [&] { return check([&] { return weighted(l2_normalize(x)); }, x); }},
      {"add_position", [&] { return check([&] { return weighted(add_position(x3, table)); }, table); }},
      {"dropout", [&] {
         return check([&] {
           std::mt19937_64 rng(3);
           return weighted(dropout(x, 0.3, rng, true));
         }, x);
       }},
      {"cross_entropy", [&] { return check([&] { return cross_entropy(x, targets); }, x); }},
  };
  std::vector<std::pair<std::string, double>> out;
  for (auto& [name, run] : cases) out.emplace_back(name, run());
  return out;
}

/// Full forward + matching loss at T=2, F=3, H=W=8, D=8, heads=2: both
/// inputs and a strided subset of every parameter tensor.
inline double full_model_error() {
  using namespace eegclip;
  model::ModelConfig cfg = model::ModelConfig::toy();
  cfg.input_h = cfg.input_w = 8;
  cfg.bands = 3;
  model::EmotionClip clip(cfg, model::HeadKind::kMatching, 3, 16);
  const auto bank = text::build_bank_stub({"negative", "neutral", "positive"}, text::PromptTemplateSet::builtin(),
                                          cfg.proj_dim);
  model::Batch batch;
  batch.de = rand_tensor({2, 2, 3, 8, 8}, 25);
  batch.psd = rand_tensor({2, 2, 3, 8, 8}, 26);
  batch.targets = {0, 2};
  auto f = [&] { return ad::cross_entropy(clip.logits(batch, &bank), batch.targets); };
  double worst = ad::grad_check(f, batch.de, 1e-5, 48).max_relative_error;
  worst = std::max(worst, ad::grad_check(f, batch.psd, 1e-5, 48).max_relative_error);
  for (const auto& p : clip.params().parameters()) {
    auto t = p.tensor;
    worst = std::max(worst, ad::grad_check(f, t, 1e-5, 4).max_relative_error);
  }
  return worst;
}

}  // namespace grad_suite
