#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eegclip/model/layers.hpp"

namespace eegclip::model {

enum class CrossQuery {
  kPsd,  // query = E_psd
  kSum,  // query = E_psd + E_de
};

struct ModelConfig {
  std::size_t embed_dim = 64;
  std::size_t heads = 4;
  std::size_t spatial_blocks = 1;
  std::size_t lego_layers = 1;
  std::size_t temporal_layers = 1;
  std::vector<std::size_t> patch_conv_channels = {16, 32, 64, 64};
  std::vector<std::size_t> patch_conv_strides = {2, 2, 2, 1};
  std::size_t proj_dim = 64;
  double temperature = 0.07;
  bool learnable_temperature = true;
  std::size_t ffn_mult = 2;
  std::size_t max_frames = 16;
  CrossQuery cross_query = CrossQuery::kPsd;
  double dropout = 0.0;
  /// Input geometry; must agree with the featurization output.
  std::size_t bands = 6;
  std::size_t input_h = 32;
  std::size_t input_w = 32;

  /// D=8, two heads, 12x12 input.
  static ModelConfig toy();

  /// Token grid side lengths after the patch convolutions.
  std::size_t token_rows() const;
  std::size_t token_cols() const;
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& cfg);
/// Fields absent from `j` keep the values already in `cfg`.
void from_json(const nlohmann::json& j, ModelConfig& cfg);

struct ForwardOptions {
  bool training = false;
  std::mt19937_64* rng = nullptr;
  AttentionTrace* trace = nullptr;
};

/// Four 3x3 conv + GELU stages, flattened to tokens, plus a learnable
/// position table. [N, 1, H, W] -> [N, n, D].
struct PatchEmbedding {
  std::vector<Conv2d> convs;
  Tensor position;

  static PatchEmbedding make(ParameterStore& store, const std::string& name, const ModelConfig& cfg);
  Tensor operator()(const Tensor& maps) const;
};

/// Self-attention followed by a multi-scale (1x1 + 3x3 + 5x5) convolutional
/// mixer on the token grid. [N, n, D] -> [N, n, D].
struct SpatialBlock {
  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  Conv2d branch1, branch3, branch5;
  std::size_t rows = 0, cols = 0;

  static SpatialBlock make(ParameterStore& store, const std::string& name, const ModelConfig& cfg);
  Tensor operator()(const Tensor& tokens, AttentionTrace* trace = nullptr) const;
};

/// Patch embedding + spatial blocks + token mean. [N, 1, H, W] -> [N, D].
struct SpatialEncoder {
  PatchEmbedding embed;
  std::vector<SpatialBlock> blocks;

  static SpatialEncoder make(ParameterStore& store, const std::string& name, const ModelConfig& cfg);
  Tensor operator()(const Tensor& maps, AttentionTrace* trace = nullptr) const;
};

struct LegoDetail {
  Tensor e_de;   // [M, F, D]
  Tensor e_psd;  // [M, F, D]
  AttentionDetail cross;
};

/// Parallel band-sequence encoders for DE and PSD joined by a cross-attention
/// decoder whose keys and values come from the DE branch.
struct Legoformer {
  Tensor band_pos_de, band_pos_psd;
  std::vector<TransformerBlock> de_layers, psd_layers;
  LayerNorm ln_q, ln_kv, ln_ffn;
  MultiHeadAttention cross;
  FeedForward ffn;
  CrossQuery query_mode = CrossQuery::kPsd;

  static Legoformer make(ParameterStore& store, const std::string& name, const ModelConfig& cfg);
  /// [M, F, D] x 2 -> [M, D]
  Tensor operator()(const Tensor& de_tokens, const Tensor& psd_tokens, AttentionTrace* trace = nullptr,
                    LegoDetail* detail = nullptr) const;
};

/// Position table, pre-norm blocks, final norm, mean over frames. [B, T, D] -> [B, D].
struct TemporalEncoder {
  Tensor position;
  std::vector<TransformerBlock> layers;
  LayerNorm ln_out;

  static TemporalEncoder make(ParameterStore& store, const std::string& name, const ModelConfig& cfg);
  Tensor operator()(const Tensor& seq, AttentionTrace* trace = nullptr) const;
};

struct SpatialTokens {
  Tensor de;   // [B, T, F, D]
  Tensor psd;  // [B, T, F, D]
};

class SstLegoVit {
 public:
  SstLegoVit(const ModelConfig& cfg, ParameterStore& store, const std::string& name = "encoder");

  /// de, psd: [B, T, F, H, W].
  SpatialTokens spatial_encode(const Tensor& de, const Tensor& psd, AttentionTrace* trace = nullptr) const;
  /// [B, T, F, D] x 2 -> [B, T, D]
  Tensor fuse(const SpatialTokens& tokens, AttentionTrace* trace = nullptr, LegoDetail* detail = nullptr) const;
  /// [B, T, F, H, W] x 2 -> [B, D]
  Tensor operator()(const Tensor& de, const Tensor& psd, const ForwardOptions& opts = {}) const;

  const ModelConfig& config() const { return cfg_; }
  SpatialEncoder& de_encoder() { return de_spatial_; }
  SpatialEncoder& psd_encoder() { return psd_spatial_; }
  Legoformer& legoformer() { return lego_; }
  TemporalEncoder& temporal() { return temporal_; }

 private:
  ModelConfig cfg_;
  SpatialEncoder de_spatial_, psd_spatial_;
  Legoformer lego_;
  TemporalEncoder temporal_;
};

}  // namespace eegclip::model
