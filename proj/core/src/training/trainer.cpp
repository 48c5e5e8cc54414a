#include "eegclip/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "eegclip/error.hpp"
#include "eegclip/hash.hpp"
#include "eegclip/matching/matching.hpp"

namespace eegclip::train {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, "run." + field + ": " + why);
}

}  // namespace

RunConfig RunConfig::toy() {
  RunConfig c;
  c.lr0 = 3e-3;
  c.batch_size = 16;
  c.max_epochs = 40;
  c.patience = 10;
  c.model = model::ModelConfig::toy();
  c.featurize = feat::FeaturizeConfig::toy();
  c.model.input_h = c.featurize.out_h;
  c.model.input_w = c.featurize.out_w;
  return c;
}

void RunConfig::validate() const {
  if (!(lr0 > 0.0)) bad("lr0", "must be positive");
  if (lr_min < 0.0 || lr_min > lr0) bad("lr_min", "must lie in [0, lr0]");
  if (weight_decay < 0.0) bad("weight_decay", "must be non-negative");
  if (batch_size == 0) bad("batch_size", "must be at least 1");
  if (max_epochs == 0) bad("max_epochs", "must be at least 1");
  if (patience > max_epochs) bad("patience", "must not exceed max_epochs");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) bad("beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) bad("beta2", "must lie in [0, 1)");
  if (!(eps > 0.0)) bad("eps", "must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) bad("val_fraction", "must lie in (0, 1)");
  if (bank.empty()) bad("bank", "expected \"stub\" or an embedding file path");
  model.validate();
  if (model.input_h != featurize.out_h || model.input_w != featurize.out_w) {
    bad("model.input_h", "model input must equal the featurized grid size");
  }
  if (model.bands != featurize.band_set.size()) bad("model.bands", "must equal the number of featurized bands");
  if (featurize.frames_per_sample > model.max_frames) bad("model.max_frames", "smaller than frames_per_sample");
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"lr0", c.lr0},
           {"lr_min", c.lr_min},
           {"weight_decay", c.weight_decay},
           {"batch_size", c.batch_size},
           {"max_epochs", c.max_epochs},
           {"patience", c.patience},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"eps", c.eps},
           {"val_fraction", c.val_fraction},
           {"seed", c.seed},
           {"n_shots", c.n_shots},
           {"source_training", c.source_training},
           {"bank", c.bank},
           {"bank_seed", c.bank_seed},
           {"model", c.model},
           {"featurize", c.featurize}};
}

void from_json(const json& j, RunConfig& c) {
  static const std::vector<std::string> known = {
      "lr0", "lr_min", "weight_decay", "batch_size", "max_epochs", "patience", "beta1", "beta2", "eps",
      "val_fraction", "seed", "n_shots", "source_training", "bank", "bank_seed", "model", "featurize"};
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
  get("lr0", c.lr0);
  get("lr_min", c.lr_min);
  get("weight_decay", c.weight_decay);
  get("batch_size", c.batch_size);
  get("max_epochs", c.max_epochs);
  get("patience", c.patience);
  get("beta1", c.beta1);
  get("beta2", c.beta2);
  get("eps", c.eps);
  get("val_fraction", c.val_fraction);
  get("seed", c.seed);
  get("n_shots", c.n_shots);
  get("source_training", c.source_training);
  get("bank", c.bank);
  get("bank_seed", c.bank_seed);
  if (j.contains("featurize")) feat::from_json(j.at("featurize"), c.featurize);
  if (j.contains("model")) model::from_json(j.at("model"), c.model);
  // Model input geometry follows the featurization unless set explicitly.
  const json model_j = j.value("model", json::object());
  if (!model_j.contains("input_h")) c.model.input_h = c.featurize.out_h;
  if (!model_j.contains("input_w")) c.model.input_w = c.featurize.out_w;
  if (!model_j.contains("bands")) c.model.bands = c.featurize.band_set.size();
}

bool EarlyStopper::update(std::size_t epoch, double value) {
  if (value > best_) {
    best_ = value;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

ValidationSplit validation_split(std::span<const std::size_t> train, double fraction, std::uint64_t seed) {
  ValidationSplit split;
  if (train.size() < 10) {
    split.fit.assign(train.begin(), train.end());
    split.validation = split.fit;
    return split;
  }
  std::vector<std::size_t> order(train.begin(), train.end());
  std::mt19937_64 rng(seed_mix(seed, {0x7a1ULL}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * order.size())));
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.fit.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.fit.begin(), split.fit.end());
  return split;
}

TrainResult train_model(model::EmotionClip& model, const text::TextBank* bank, std::span<const feat::Sample4D> samples,
                        std::span<const std::size_t> train, const RunConfig& cfg) {
  if (train.empty()) throw Error(ErrorCode::kInsufficientData, "train: empty training set");
  cfg.validate();
  const ValidationSplit split = validation_split(train, cfg.val_fraction, cfg.seed);
  AdamW optimizer(model.params(), cfg.adamw());
  EarlyStopper stopper(cfg.patience);
  std::mt19937_64 dropout_rng(seed_mix(cfg.seed, {0xd0ULL}));
  model::ForwardOptions train_opts{true, &dropout_rng, nullptr};

  TrainResult result;
  auto best = model.params().snapshot();
  std::vector<std::size_t> order = split.fit;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double lr = cosine_lr(epoch - 1, cfg.lr0, cfg.lr_min, cfg.max_epochs);
    std::mt19937_64 rng(seed_mix(cfg.seed, {epoch}));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const auto idx = std::span<const std::size_t>(order).subspan(start, end - start);
      const model::Batch batch = model::make_batch(samples, idx);
      model.params().zero_grad();
      const ad::Tensor loss = match::matching_loss(model.logits(batch, bank, train_opts), batch.targets);
      ad::backward(loss);
      optimizer.step(lr);
      loss_sum += loss.item() * static_cast<double>(idx.size());
    }
    model.params().zero_grad();
    const double val_acc = accuracy(model, bank, samples, split.validation, cfg.batch_size);
    result.history.push_back({epoch, lr, loss_sum / static_cast<double>(order.size()), val_acc});
    if (stopper.update(epoch, val_acc)) best = model.params().snapshot();
    if (stopper.should_stop()) {
      result.early_stopped = epoch < cfg.max_epochs;
      break;
    }
  }
  model.params().restore(best);
  result.best_epoch = stopper.best_epoch();
  result.best_val_acc = stopper.best_value();
  return result;
}

std::vector<std::size_t> predict_samples(const model::EmotionClip& model, const text::TextBank* bank,
                                         std::span<const feat::Sample4D> samples,
                                         std::span<const std::size_t> indices, std::size_t batch_size) {
  ad::NoGradGuard no_grad;
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  batch_size = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const std::size_t end = std::min(indices.size(), start + batch_size);
    const model::Batch batch = model::make_batch(samples, indices.subspan(start, end - start));
    const auto pred = match::predict_indices(model.logits(batch, bank));
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

double accuracy(const model::EmotionClip& model, const text::TextBank* bank, std::span<const feat::Sample4D> samples,
                std::span<const std::size_t> indices, std::size_t batch_size) {
  if (indices.empty()) throw Error(ErrorCode::kInsufficientData, "evaluate: empty sample set");
  const auto pred = predict_samples(model, bank, samples, indices, batch_size);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) correct += pred[i] == samples[indices[i]].label_index ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

Metrics aggregate(std::span<const double> per_fold) {
  Metrics m;
  m.per_fold.assign(per_fold.begin(), per_fold.end());
  if (per_fold.empty()) return m;
  double sum = 0.0;
  for (double v : per_fold) sum += v;
  m.mean = sum / static_cast<double>(per_fold.size());
  if (per_fold.size() > 1) {
    double ss = 0.0;
    for (double v : per_fold) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(per_fold.size() - 1));
  }
  return m;
}

}  // namespace eegclip::train
