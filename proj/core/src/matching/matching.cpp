#include "eegclip/matching/matching.hpp"

#include <cmath>

#include "eegclip/autodiff/ops.hpp"
#include "eegclip/error.hpp"

namespace eegclip::match {

namespace {

ad::Tensor cosine(const ad::Tensor& eeg, const text::TextBank& bank) {
  if (eeg.rank() != 2 || eeg.dim(1) != bank.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "similarity: embeddings " + ad::to_string(eeg.shape()) +
                                               " do not match bank dim " + std::to_string(bank.dim()));
  }
  return ad::matmul(eeg, ad::transpose(bank.matrix()));
}

}  // namespace

ad::Tensor similarity_logits(const ad::Tensor& eeg, const text::TextBank& bank, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "similarity: temperature must be positive");
  return ad::scale(cosine(eeg, bank), 1.0 / tau);
}

ad::Tensor similarity_logits(const ad::Tensor& eeg, const text::TextBank& bank, const ad::Tensor& log_scale) {
  return ad::mul_scalar(cosine(eeg, bank), ad::exp(log_scale));
}

std::vector<std::size_t> predict_indices(const ad::Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) < 2) {
    throw Error(ErrorCode::kShapeMismatch, "predict: logits must be [B, K] with K >= 2");
  }
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  const auto v = logits.values();
  std::vector<std::size_t> out(B);
  for (std::size_t i = 0; i < B; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k) {
      if (v[i * K + k] > v[i * K + best]) best = k;
    }
    out[i] = best;
  }
  return out;
}

std::vector<std::string> predict(const ad::Tensor& logits, std::span<const std::string> labels) {
  if (labels.size() != logits.dim(1)) throw Error(ErrorCode::kShapeMismatch, "predict: label count differs from K");
  std::vector<std::string> out;
  for (auto k : predict_indices(logits)) out.push_back(labels[k]);
  return out;
}

ad::Tensor matching_loss(const ad::Tensor& logits, std::span<const std::size_t> targets) {
  return ad::cross_entropy(logits, targets);
}

}  // namespace eegclip::match
