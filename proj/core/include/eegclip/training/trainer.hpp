#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eegclip/featurize/featurize.hpp"
#include "eegclip/model/emotion_clip.hpp"
#include "eegclip/text/text_bank.hpp"
#include "eegclip/training/optimizer.hpp"

namespace eegclip::train {

struct RunConfig {
  double lr0 = 1e-4;
  double lr_min = 0.0;
  double weight_decay = 0.003;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 300;
  std::size_t patience = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Share of the training indices held out to drive early stopping.
  double val_fraction = 0.1;
  std::uint64_t seed = 1;
  /// N values swept by the N-shot harness.
  std::vector<std::size_t> n_shots = {0, 1, 2, 4, 8, 16, 32};
  /// N-shot only: also train on the source domain, not just the adapt set.
  bool source_training = false;
  /// "stub" or a path to an embedding file.
  std::string bank = "stub";
  std::uint64_t bank_seed = 0;
  model::ModelConfig model;
  feat::FeaturizeConfig featurize;

  /// Toy model and featurization with a faster schedule.
  static RunConfig toy();
  AdamWConfig adamw() const { return {beta1, beta2, eps, weight_decay}; }
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& cfg);
/// Fields absent from `j` keep the values already in `cfg`.
void from_json(const nlohmann::json& j, RunConfig& cfg);

/// Strict-improvement early stopping on a maximised metric.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Returns true when `value` is a new best.
  bool update(std::size_t epoch, double value);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t since_best_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = -1.0;
};

struct ValidationSplit {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> validation;
};

/// Seeded hold-out of round(fraction * n) indices (at least one). With fewer
/// than 10 indices both sides are the full set.
ValidationSplit validation_split(std::span<const std::size_t> train, double fraction, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  bool early_stopped = false;
};

/// Shuffled mini-batch AdamW with a per-epoch cosine schedule. The model
/// ends up holding the parameters of the best validation epoch.
TrainResult train_model(model::EmotionClip& model, const text::TextBank* bank, std::span<const feat::Sample4D> samples,
                        std::span<const std::size_t> train, const RunConfig& cfg);

/// Eval-mode predicted class indices.
std::vector<std::size_t> predict_samples(const model::EmotionClip& model, const text::TextBank* bank,
                                         std::span<const feat::Sample4D> samples,
                                         std::span<const std::size_t> indices, std::size_t batch_size = 64);

/// Fraction of correctly predicted samples.
double accuracy(const model::EmotionClip& model, const text::TextBank* bank, std::span<const feat::Sample4D> samples,
                std::span<const std::size_t> indices, std::size_t batch_size = 64);

struct Metrics {
  std::vector<double> per_fold;
  double mean = 0.0;
  /// Sample standard deviation (0 for a single fold).
  double std = 0.0;
};

Metrics aggregate(std::span<const double> per_fold);

}  // namespace eegclip::train
