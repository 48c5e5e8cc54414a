#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "eegclip/autodiff/tensor.hpp"

namespace eegclip::ad {

// Elementwise binary ops accept equal shapes, or a right operand whose shape
// is a suffix of the left operand's (broadcast over leading axes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
/// a * s where s holds a single value.
Tensor mul_scalar(const Tensor& a, const Tensor& s);
Tensor exp(const Tensor& a);

/// a: [..., M, K]; b: [K, N] (shared) or [..., K, N] with a's leading dims.
Tensor matmul(const Tensor& a, const Tensor& b);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Cross-correlation. x: [N, C_in, H, W] or [C_in, H, W]; kernel:
/// [C_out, C_in, k, k]; bias: [C_out] or undefined.
Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, Conv2dOptions opts = {});

Tensor relu(const Tensor& x);
/// Exact form x * Phi(x).
Tensor gelu(const Tensor& x);
/// Over the last axis, max-shifted.
Tensor softmax(const Tensor& x);
/// Over the last axis with biased variance; gamma and beta have the last dim.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Removes `axis`.
Tensor mean(const Tensor& x, std::size_t axis);
/// Sum of all entries as a [1] tensor.
Tensor sum(const Tensor& x);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, std::span<const std::size_t> perm);
/// Swaps the last two axes.
Tensor transpose(const Tensor& x);

/// x / max(||x||, eps) over the last axis.
Tensor l2_normalize(const Tensor& x, double eps = 1e-12);

/// x: [..., T, D]; table: [T_max, D] with T <= T_max. Adds table rows 0..T-1.
Tensor add_position(const Tensor& x, const Tensor& table);

/// Inverted dropout; identity when !training or p == 0.
Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng, bool training);

/// Mean over rows of -log softmax(logits[i])[targets[i]]. logits: [B, K].
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> targets);

}  // namespace eegclip::ad
