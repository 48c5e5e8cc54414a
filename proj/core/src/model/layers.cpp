#include "eegclip/model/layers.hpp"

#include <cmath>

#include "eegclip/error.hpp"

namespace eegclip::model {

Linear Linear::make(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                    bool with_bias) {
  Linear l;
  l.weight = store.xavier(name + ".weight", {in, out}, in, out);
  if (with_bias) l.bias = store.zeros(name + ".bias", {out});
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = ad::matmul(x, weight);
  return bias.defined() ? ad::add(y, bias) : y;
}

LayerNorm LayerNorm::make(ParameterStore& store, const std::string& name, std::size_t dim) {
  return {store.ones(name + ".gamma", {dim}), store.zeros(name + ".beta", {dim})};
}

Tensor LayerNorm::operator()(const Tensor& x) const { return ad::layer_norm(x, gamma, beta); }

Conv2d Conv2d::make(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
                    std::size_t k, std::size_t stride, std::size_t padding) {
  Conv2d c;
  c.kernel = store.xavier(name + ".kernel", {out, in, k, k}, in * k * k, out * k * k);
  c.bias = store.zeros(name + ".bias", {out});
  c.options = {stride, padding};
  return c;
}

Tensor Conv2d::operator()(const Tensor& x) const { return ad::conv2d(x, kernel, bias, options); }

MultiHeadAttention MultiHeadAttention::make(ParameterStore& store, const std::string& name, std::size_t dim,
                                            std::size_t heads) {
  if (heads == 0 || dim % heads != 0) {
    throw Error(ErrorCode::kInvalidConfig, name + ": embed dim " + std::to_string(dim) +
                                               " not divisible by heads " + std::to_string(heads));
  }
  MultiHeadAttention m;
  m.q = Linear::make(store, name + ".q", dim, dim);
  m.k = Linear::make(store, name + ".k", dim, dim, false);
  m.v = Linear::make(store, name + ".v", dim, dim);
  m.o = Linear::make(store, name + ".o", dim, dim);
  m.heads = heads;
  return m;
}

namespace {

/// [B, L, D] -> [B, H, L, D/H]
Tensor split_heads(const Tensor& x, std::size_t heads) {
  const std::size_t B = x.dim(0), L = x.dim(1), D = x.dim(2);
  static constexpr std::size_t kPerm[] = {0, 2, 1, 3};
  return ad::permute(ad::reshape(x, {B, L, heads, D / heads}), kPerm);
}

}  // namespace

Tensor MultiHeadAttention::operator()(const Tensor& query_src, const Tensor& kv_src, AttentionTrace* trace,
                                      AttentionDetail* detail) const {
  if (query_src.rank() != 3 || kv_src.rank() != 3 || query_src.dim(0) != kv_src.dim(0) ||
      query_src.dim(2) != kv_src.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch, "attention expects [B, L, D] inputs, got " +
                                               ad::to_string(query_src.shape()) + " and " +
                                               ad::to_string(kv_src.shape()));
  }
  const std::size_t B = query_src.dim(0), Lq = query_src.dim(1), D = query_src.dim(2);
  const Tensor qh = split_heads(q(query_src), heads);
  const Tensor kh = split_heads(k(kv_src), heads);
  const Tensor vh = split_heads(v(kv_src), heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(D / heads));
  const Tensor weights = ad::softmax(ad::scale(ad::matmul(qh, ad::transpose(kh)), scale));
  if (trace) trace->weights.push_back(weights);
  static constexpr std::size_t kPerm[] = {0, 2, 1, 3};
  const Tensor ctx = ad::reshape(ad::permute(ad::matmul(weights, vh), kPerm), {B, Lq, D});
  if (detail) {
    detail->values = vh;
    detail->context = ctx;
  }
  return o(ctx);
}

FeedForward FeedForward::make(ParameterStore& store, const std::string& name, std::size_t dim,
                              std::size_t hidden) {
  return {Linear::make(store, name + ".fc1", dim, hidden), Linear::make(store, name + ".fc2", hidden, dim)};
}

Tensor FeedForward::operator()(const Tensor& x) const { return fc2(ad::gelu(fc1(x))); }

TransformerBlock TransformerBlock::make(ParameterStore& store, const std::string& name, std::size_t dim,
                                        std::size_t heads, std::size_t hidden) {
  TransformerBlock b;
  b.ln1 = LayerNorm::make(store, name + ".ln1", dim);
  b.attn = MultiHeadAttention::make(store, name + ".attn", dim, heads);
  b.ln2 = LayerNorm::make(store, name + ".ln2", dim);
  b.ffn = FeedForward::make(store, name + ".ffn", dim, hidden);
  return b;
}

Tensor TransformerBlock::operator()(const Tensor& x, AttentionTrace* trace) const {
  const Tensor n1 = ln1(x);
  const Tensor h = ad::add(x, attn(n1, n1, trace));
  return ad::add(h, ffn(ln2(h)));
}

}  // namespace eegclip::model
