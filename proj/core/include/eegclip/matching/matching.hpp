#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eegclip/autodiff/tensor.hpp"
#include "eegclip/text/text_bank.hpp"

namespace eegclip::match {

/// logits[i][k] = (eeg_i . class_k) / tau. eeg: [B, dim].
ad::Tensor similarity_logits(const ad::Tensor& eeg, const text::TextBank& bank, double tau);
/// Same with a learnable scale: logits = (eeg . class) * exp(log_scale).
ad::Tensor similarity_logits(const ad::Tensor& eeg, const text::TextBank& bank, const ad::Tensor& log_scale);

/// Row-wise argmax, lowest index on ties.
std::vector<std::size_t> predict_indices(const ad::Tensor& logits);
std::vector<std::string> predict(const ad::Tensor& logits, std::span<const std::string> labels);

/// Mean cross-entropy of the softmax over class logits.
ad::Tensor matching_loss(const ad::Tensor& logits, std::span<const std::size_t> targets);

}  // namespace eegclip::match
