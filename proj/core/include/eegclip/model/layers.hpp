#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eegclip/autodiff/ops.hpp"
#include "eegclip/autodiff/parameters.hpp"

namespace eegclip::model {

using ad::ParameterStore;
using ad::Tensor;

/// Collects softmax weight tensors when attached to a forward pass.
struct AttentionTrace {
  std::vector<Tensor> weights;
};

/// y = x W + b over the last axis. W is [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear make(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                     bool with_bias = true);
  Tensor operator()(const Tensor& x) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;

  static LayerNorm make(ParameterStore& store, const std::string& name, std::size_t dim);
  Tensor operator()(const Tensor& x) const;
};

struct Conv2d {
  Tensor kernel;
  Tensor bias;
  ad::Conv2dOptions options;

  static Conv2d make(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                     std::size_t k, std::size_t stride, std::size_t padding);
  Tensor operator()(const Tensor& x) const;
};

/// Optional intermediate outputs of one attention call.
struct AttentionDetail {
  Tensor values;   // [B, heads, Lk, head_dim]
  Tensor context;  // [B, Lq, D], before the output projection
};

/// Multi-head scaled dot-product attention over [B, L, D] inputs. The key
/// projection has no bias.
struct MultiHeadAttention {
  Linear q, k, v, o;
  std::size_t heads = 1;

  static MultiHeadAttention make(ParameterStore& store, const std::string& name, std::size_t dim,
                                 std::size_t heads);
  Tensor operator()(const Tensor& query_src, const Tensor& kv_src, AttentionTrace* trace = nullptr,
                    AttentionDetail* detail = nullptr) const;
};

struct FeedForward {
  Linear fc1, fc2;

  static FeedForward make(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t hidden);
  Tensor operator()(const Tensor& x) const;
};

/// Pre-norm transformer block: x + MHA(LN(x)), then x + FFN(LN(x)).
struct TransformerBlock {
  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  FeedForward ffn;

  static TransformerBlock make(ParameterStore& store, const std::string& name, std::size_t dim,
                               std::size_t heads, std::size_t hidden);
  Tensor operator()(const Tensor& x, AttentionTrace* trace = nullptr) const;
};

}  // namespace eegclip::model
