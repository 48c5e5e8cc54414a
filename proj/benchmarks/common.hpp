#pragma once

#include <random>
#include <vector>

#include "eegclip/autodiff/tensor.hpp"

namespace bm {

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline eegclip::ad::Tensor random_tensor(eegclip::ad::Shape shape, std::uint64_t seed, bool grad = false) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return eegclip::ad::Tensor::from_values(std::move(shape), gaussian(n, seed), grad);
}

}  // namespace bm
