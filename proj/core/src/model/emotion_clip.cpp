#include "eegclip/model/emotion_clip.hpp"

#include <cmath>

#include "eegclip/error.hpp"
#include "eegclip/matching/matching.hpp"

namespace eegclip::model {

Batch make_batch(std::span<const feat::Sample4D> samples, std::span<const std::size_t> indices) {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    indices = all;
  }
  if (indices.empty()) throw Error(ErrorCode::kInsufficientData, "make_batch: no samples");
  const auto& first = samples[indices[0]].de;
  const ad::Shape item = {first.frames, first.bands, first.height, first.width};
  const std::size_t per = ad::numel(item);
  std::vector<double> de, psd;
  de.reserve(per * indices.size());
  psd.reserve(per * indices.size());
  Batch b;
  for (auto i : indices) {
    const auto& s = samples[i];
    if (s.de.values.size() != per || s.psd.values.size() != per || s.de.frames != first.frames ||
        s.de.bands != first.bands || s.de.height != first.height) {
      throw Error(ErrorCode::kShapeMismatch, "make_batch: samples differ in shape");
    }
    de.insert(de.end(), s.de.values.begin(), s.de.values.end());
    psd.insert(psd.end(), s.psd.values.begin(), s.psd.values.end());
    b.targets.push_back(s.label_index);
  }
  ad::Shape shape = {indices.size()};
  shape.insert(shape.end(), item.begin(), item.end());
  b.de = Tensor::from_values(shape, std::move(de));
  b.psd = Tensor::from_values(shape, std::move(psd));
  return b;
}

EmotionClip::EmotionClip(const ModelConfig& cfg, HeadKind head, std::size_t num_classes, std::uint64_t seed)
    : store_(seed), encoder_(cfg, store_), head_(head), num_classes_(num_classes) {
  if (num_classes < 2) throw Error(ErrorCode::kInvalidConfig, "model: at least two classes required");
  if (head_ == HeadKind::kMatching) {
    head_layer_ = Linear::make(store_, "head.proj", cfg.embed_dim, cfg.proj_dim);
    const double init = std::log(1.0 / cfg.temperature);
    log_scale_ = cfg.learnable_temperature ? store_.constant("head.log_scale", {1}, init) : Tensor::scalar(init);
  } else {
    head_layer_ = Linear::make(store_, "head.linear", cfg.embed_dim, num_classes);
  }
}

Tensor EmotionClip::features(const Batch& batch, const ForwardOptions& opts) const {
  return encoder_(batch.de, batch.psd, opts);
}

Tensor EmotionClip::embed(const Batch& batch, const ForwardOptions& opts) const {
  if (head_ != HeadKind::kMatching) throw Error(ErrorCode::kInvalidArgument, "embed: model has a linear head");
  return ad::l2_normalize(head_layer_(features(batch, opts)));
}

Tensor EmotionClip::logits(const Batch& batch, const text::TextBank* bank, const ForwardOptions& opts) const {
  if (head_ == HeadKind::kLinear) return head_layer_(features(batch, opts));
  if (!bank) throw Error(ErrorCode::kInvalidArgument, "logits: matching head needs a text bank");
  if (bank->size() != num_classes_) {
    throw Error(ErrorCode::kShapeMismatch, "logits: bank has " + std::to_string(bank->size()) + " classes, model " +
                                               std::to_string(num_classes_));
  }
  return match::similarity_logits(embed(batch, opts), *bank, log_scale_);
}

}  // namespace eegclip::model
