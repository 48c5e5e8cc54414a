#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eegclip/featurize/featurize.hpp"
#include "eegclip/model/sst_legovit.hpp"
#include "eegclip/text/text_bank.hpp"

namespace eegclip::model {

enum class HeadKind {
  kMatching,  // projection + unit norm, scored against a text bank
  kLinear,    // K-way linear classifier
};

struct Batch {
  Tensor de;   // [B, T, F, H, W]
  Tensor psd;  // [B, T, F, H, W]
  std::vector<std::size_t> targets;
};

/// Stacks the selected samples (all of them when `indices` is empty).
Batch make_batch(std::span<const feat::Sample4D> samples, std::span<const std::size_t> indices = {});

/// Encoder plus one of the two heads, with its own parameter store.
class EmotionClip {
 public:
  EmotionClip(const ModelConfig& cfg, HeadKind head, std::size_t num_classes, std::uint64_t seed);
  EmotionClip(const EmotionClip&) = delete;
  EmotionClip& operator=(const EmotionClip&) = delete;

  /// Encoder output, [B, D].
  Tensor features(const Batch& batch, const ForwardOptions& opts = {}) const;
  /// Unit-norm embeddings, [B, proj_dim]. Matching head only.
  Tensor embed(const Batch& batch, const ForwardOptions& opts = {}) const;
  /// [B, K]. The bank is required for the matching head and ignored otherwise.
  Tensor logits(const Batch& batch, const text::TextBank* bank, const ForwardOptions& opts = {}) const;

  HeadKind head_kind() const { return head_; }
  std::size_t num_classes() const { return num_classes_; }
  const ModelConfig& config() const { return encoder_.config(); }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  const SstLegoVit& encoder() const { return encoder_; }
  SstLegoVit& encoder() { return encoder_; }
  const Linear& head() const { return head_layer_; }
  const Tensor& log_scale() const { return log_scale_; }

 private:
  ParameterStore store_;
  SstLegoVit encoder_;
  HeadKind head_;
  std::size_t num_classes_;
  Linear head_layer_;
  Tensor log_scale_;
};

}  // namespace eegclip::model
