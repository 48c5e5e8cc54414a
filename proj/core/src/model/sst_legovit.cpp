#include "eegclip/model/sst_legovit.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "eegclip/error.hpp"

namespace eegclip::model {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, "model." + field + ": " + why);
}

std::size_t conv_out(std::size_t n, std::size_t stride) { return (n + 2 - 3) / stride + 1; }

}  // namespace

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.embed_dim = 8;
  c.heads = 2;
  c.patch_conv_channels = {4, 8, 8, 8};
  c.patch_conv_strides = {2, 2, 1, 1};
  c.proj_dim = 16;
  c.input_h = 12;
  c.input_w = 12;
  return c;
}

std::size_t ModelConfig::token_rows() const {
  std::size_t n = input_h;
  for (auto s : patch_conv_strides) n = conv_out(n, s);
  return n;
}

std::size_t ModelConfig::token_cols() const {
  std::size_t n = input_w;
  for (auto s : patch_conv_strides) n = conv_out(n, s);
  return n;
}

void ModelConfig::validate() const {
  if (embed_dim == 0) bad("embed_dim", "must be positive");
  if (heads == 0 || embed_dim % heads != 0) bad("heads", "must divide embed_dim");
  if (patch_conv_channels.size() != 4) bad("patch_conv_channels", "exactly four stages required");
  if (patch_conv_strides.size() != 4) bad("patch_conv_strides", "exactly four stages required");
  if (patch_conv_channels.back() != embed_dim) bad("patch_conv_channels", "last stage must equal embed_dim");
  if (std::find(patch_conv_channels.begin(), patch_conv_channels.end(), 0u) != patch_conv_channels.end()) {
    bad("patch_conv_channels", "must be positive");
  }
  std::size_t stride_product = 1;
  for (auto s : patch_conv_strides) {
    if (s == 0) bad("patch_conv_strides", "must be positive");
    stride_product *= s;
  }
  if (input_h == 0 || input_w == 0) bad("input_h", "input size must be positive");
  if (input_h % stride_product != 0 || input_w % stride_product != 0) {
    bad("patch_conv_strides", "stride product " + std::to_string(stride_product) + " must divide input " +
                                  std::to_string(input_h) + "x" + std::to_string(input_w));
  }
  if (proj_dim == 0) bad("proj_dim", "must be positive");
  if (!(temperature > 0.0)) bad("temperature", "must be positive");
  if (ffn_mult == 0) bad("ffn_mult", "must be positive");
  if (max_frames == 0) bad("max_frames", "must be positive");
  if (bands == 0) bad("bands", "must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) bad("dropout", "must lie in [0, 1)");
}

void to_json(json& j, const ModelConfig& c) {
  j = json{{"embed_dim", c.embed_dim},
           {"heads", c.heads},
           {"spatial_blocks", c.spatial_blocks},
           {"lego_layers", c.lego_layers},
           {"temporal_layers", c.temporal_layers},
           {"patch_conv_channels", c.patch_conv_channels},
           {"patch_conv_strides", c.patch_conv_strides},
           {"proj_dim", c.proj_dim},
           {"temperature", c.temperature},
           {"learnable_temperature", c.learnable_temperature},
           {"ffn_mult", c.ffn_mult},
           {"max_frames", c.max_frames},
           {"cross_query", c.cross_query == CrossQuery::kPsd ? "psd" : "sum"},
           {"dropout", c.dropout},
           {"bands", c.bands},
           {"input_h", c.input_h},
           {"input_w", c.input_w}};
}

void from_json(const json& j, ModelConfig& c) {
  static const std::vector<std::string> known = {
      "embed_dim", "heads", "spatial_blocks", "lego_layers", "temporal_layers", "patch_conv_channels",
      "patch_conv_strides", "proj_dim", "temperature", "learnable_temperature", "ffn_mult", "max_frames",
      "cross_query", "dropout", "bands", "input_h", "input_w"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) bad(key, "unknown field");
  }
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const json::exception& e) {
      bad(key, e.what());
    }
  };
  get("embed_dim", c.embed_dim);
  get("heads", c.heads);
  get("spatial_blocks", c.spatial_blocks);
  get("lego_layers", c.lego_layers);
  get("temporal_layers", c.temporal_layers);
  get("patch_conv_channels", c.patch_conv_channels);
  get("patch_conv_strides", c.patch_conv_strides);
  get("proj_dim", c.proj_dim);
  get("temperature", c.temperature);
  get("learnable_temperature", c.learnable_temperature);
  get("ffn_mult", c.ffn_mult);
  get("max_frames", c.max_frames);
  if (j.contains("cross_query")) {
    const auto mode = j.at("cross_query").get<std::string>();
    if (mode == "psd") c.cross_query = CrossQuery::kPsd;
    else if (mode == "sum") c.cross_query = CrossQuery::kSum;
    else bad("cross_query", "expected psd or sum");
  }
  get("dropout", c.dropout);
  get("bands", c.bands);
  get("input_h", c.input_h);
  get("input_w", c.input_w);
}

PatchEmbedding PatchEmbedding::make(ParameterStore& store, const std::string& name, const ModelConfig& cfg) {
  PatchEmbedding p;
  std::size_t in = 1;
  for (std::size_t i = 0; i < cfg.patch_conv_channels.size(); ++i) {
    const std::size_t out = cfg.patch_conv_channels[i];
    p.convs.push_back(Conv2d::make(store, name + ".conv" + std::to_string(i), in, out, 3, cfg.patch_conv_strides[i], 1));
    in = out;
  }
  const std::size_t n = cfg.token_rows() * cfg.token_cols();
  p.position = store.xavier(name + ".position", {n, cfg.embed_dim}, n, cfg.embed_dim);
  return p;
}

Tensor PatchEmbedding::operator()(const Tensor& maps) const {
  Tensor x = maps;
  for (const auto& conv : convs) x = ad::gelu(conv(x));
  const std::size_t N = x.dim(0), D = x.dim(1), n = x.dim(2) * x.dim(3);
  if (n != position.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch, "patch embedding produced " + std::to_string(n) + " tokens, expected " +
                                               std::to_string(position.dim(0)));
  }
  return ad::add_position(ad::transpose(ad::reshape(x, {N, D, n})), position);
}

SpatialBlock SpatialBlock::make(ParameterStore& store, const std::string& name, const ModelConfig& cfg) {
  const std::size_t D = cfg.embed_dim;
  SpatialBlock b;
  b.ln1 = LayerNorm::make(store, name + ".ln1", D);
  b.attn = MultiHeadAttention::make(store, name + ".attn", D, cfg.heads);
  b.ln2 = LayerNorm::make(store, name + ".ln2", D);
  b.branch1 = Conv2d::make(store, name + ".branch1", D, D, 1, 1, 0);
  b.branch3 = Conv2d::make(store, name + ".branch3", D, D, 3, 1, 1);
  b.branch5 = Conv2d::make(store, name + ".branch5", D, D, 5, 1, 2);
  b.rows = cfg.token_rows();
  b.cols = cfg.token_cols();
  return b;
}

Tensor SpatialBlock::operator()(const Tensor& tokens, AttentionTrace* trace) const {
  const std::size_t N = tokens.dim(0), n = tokens.dim(1), D = tokens.dim(2);
  if (n != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch, "spatial block expects a " + std::to_string(rows) + "x" +
                                               std::to_string(cols) + " token grid, got " + std::to_string(n) +
                                               " tokens");
  }
  const Tensor n1 = ln1(tokens);
  const Tensor h = ad::add(tokens, attn(n1, n1, trace));
  const Tensor grid = ad::reshape(ad::transpose(ln2(h)), {N, D, rows, cols});
  const Tensor mixed = ad::gelu(ad::add(ad::add(branch1(grid), branch3(grid)), branch5(grid)));
  return ad::add(h, ad::transpose(ad::reshape(mixed, {N, D, n})));
}

SpatialEncoder SpatialEncoder::make(ParameterStore& store, const std::string& name, const ModelConfig& cfg) {
  SpatialEncoder e;
  e.embed = PatchEmbedding::make(store, name + ".embed", cfg);
  for (std::size_t i = 0; i < cfg.spatial_blocks; ++i) {
    e.blocks.push_back(SpatialBlock::make(store, name + ".block" + std::to_string(i), cfg));
  }
  return e;
}

Tensor SpatialEncoder::operator()(const Tensor& maps, AttentionTrace* trace) const {
  Tensor x = embed(maps);
  for (const auto& b : blocks) x = b(x, trace);
  return ad::mean(x, 1);
}

Legoformer Legoformer::make(ParameterStore& store, const std::string& name, const ModelConfig& cfg) {
  const std::size_t D = cfg.embed_dim;
  const std::size_t hidden = D * cfg.ffn_mult;
  Legoformer l;
  l.band_pos_de = store.xavier(name + ".band_pos_de", {cfg.bands, D}, cfg.bands, D);
  l.band_pos_psd = store.xavier(name + ".band_pos_psd", {cfg.bands, D}, cfg.bands, D);
  for (std::size_t i = 0; i < cfg.lego_layers; ++i) {
    l.de_layers.push_back(TransformerBlock::make(store, name + ".de" + std::to_string(i), D, cfg.heads, hidden));
  }
  for (std::size_t i = 0; i < cfg.lego_layers; ++i) {
    l.psd_layers.push_back(TransformerBlock::make(store, name + ".psd" + std::to_string(i), D, cfg.heads, hidden));
  }
  l.ln_q = LayerNorm::make(store, name + ".ln_q", D);
  l.ln_kv = LayerNorm::make(store, name + ".ln_kv", D);
  l.cross = MultiHeadAttention::make(store, name + ".cross", D, cfg.heads);
  l.ln_ffn = LayerNorm::make(store, name + ".ln_ffn", D);
  l.ffn = FeedForward::make(store, name + ".ffn", D, hidden);
  l.query_mode = cfg.cross_query;
  return l;
}

Tensor Legoformer::operator()(const Tensor& de_tokens, const Tensor& psd_tokens, AttentionTrace* trace,
                              LegoDetail* detail) const {
  if (de_tokens.shape() != psd_tokens.shape() || de_tokens.rank() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "legoformer expects matching [M, F, D] inputs, got " +
                                               ad::to_string(de_tokens.shape()) + " and " +
                                               ad::to_string(psd_tokens.shape()));
  }
  Tensor e_de = ad::add_position(de_tokens, band_pos_de);
  for (const auto& layer : de_layers) e_de = layer(e_de, trace);
  Tensor e_psd = ad::add_position(psd_tokens, band_pos_psd);
  for (const auto& layer : psd_layers) e_psd = layer(e_psd, trace);

  const Tensor query = query_mode == CrossQuery::kPsd ? e_psd : ad::add(e_psd, e_de);
  Tensor z = ad::add(query, cross(ln_q(query), ln_kv(e_de), trace, detail ? &detail->cross : nullptr));
  z = ad::add(z, ffn(ln_ffn(z)));
  if (detail) {
    detail->e_de = e_de;
    detail->e_psd = e_psd;
  }
  return ad::mean(z, 1);
}

TemporalEncoder TemporalEncoder::make(ParameterStore& store, const std::string& name, const ModelConfig& cfg) {
  const std::size_t D = cfg.embed_dim;
  TemporalEncoder t;
  t.position = store.xavier(name + ".position", {cfg.max_frames, D}, cfg.max_frames, D);
  for (std::size_t i = 0; i < cfg.temporal_layers; ++i) {
    t.layers.push_back(TransformerBlock::make(store, name + ".layer" + std::to_string(i), D, cfg.heads, D * cfg.ffn_mult));
  }
  t.ln_out = LayerNorm::make(store, name + ".ln_out", D);
  return t;
}

Tensor TemporalEncoder::operator()(const Tensor& seq, AttentionTrace* trace) const {
  Tensor x = ad::add_position(seq, position);
  for (const auto& layer : layers) x = layer(x, trace);
  return ad::mean(ln_out(x), 1);
}

SstLegoVit::SstLegoVit(const ModelConfig& cfg, ParameterStore& store, const std::string& name) : cfg_(cfg) {
  cfg_.validate();
  de_spatial_ = SpatialEncoder::make(store, name + ".spatial_de", cfg_);
  psd_spatial_ = SpatialEncoder::make(store, name + ".spatial_psd", cfg_);
  lego_ = Legoformer::make(store, name + ".lego", cfg_);
  temporal_ = TemporalEncoder::make(store, name + ".temporal", cfg_);
}

SpatialTokens SstLegoVit::spatial_encode(const Tensor& de, const Tensor& psd, AttentionTrace* trace) const {
  if (de.rank() != 5 || de.shape() != psd.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "expected matching [B, T, F, H, W] inputs, got " +
                                               ad::to_string(de.shape()) + " and " + ad::to_string(psd.shape()));
  }
  const std::size_t B = de.dim(0), T = de.dim(1), F = de.dim(2), H = de.dim(3), W = de.dim(4);
  if (H != cfg_.input_h || W != cfg_.input_w || F > cfg_.bands || T > cfg_.max_frames) {
    throw Error(ErrorCode::kShapeMismatch, "input " + ad::to_string(de.shape()) + " does not fit the model config");
  }
  const std::size_t D = cfg_.embed_dim;
  const Tensor d = de_spatial_(ad::reshape(de, {B * T * F, 1, H, W}), trace);
  const Tensor p = psd_spatial_(ad::reshape(psd, {B * T * F, 1, H, W}), trace);
  return {ad::reshape(d, {B, T, F, D}), ad::reshape(p, {B, T, F, D})};
}

Tensor SstLegoVit::fuse(const SpatialTokens& tokens, AttentionTrace* trace, LegoDetail* detail) const {
  const std::size_t B = tokens.de.dim(0), T = tokens.de.dim(1), F = tokens.de.dim(2), D = tokens.de.dim(3);
  const Tensor fused = lego_(ad::reshape(tokens.de, {B * T, F, D}), ad::reshape(tokens.psd, {B * T, F, D}), trace,
                             detail);
  return ad::reshape(fused, {B, T, D});
}

Tensor SstLegoVit::operator()(const Tensor& de, const Tensor& psd, const ForwardOptions& opts) const {
  const Tensor seq = fuse(spatial_encode(de, psd, opts.trace), opts.trace);
  const Tensor out = temporal_(seq, opts.trace);
  if (opts.training && cfg_.dropout > 0.0 && opts.rng) return ad::dropout(out, cfg_.dropout, *opts.rng, true);
  return out;
}

}  // namespace eegclip::model
