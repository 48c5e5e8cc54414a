#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eegclip/featurize/featurize.hpp"
#include "eegclip/model/emotion_clip.hpp"
#include "eegclip/text/text_bank.hpp"
#include "eegclip/training/protocols.hpp"
#include "eegclip/training/trainer.hpp"

namespace eegclip::train {

inline constexpr const char* kArmMatching = "text_matching";
inline constexpr const char* kArmLinear = "linear_head";

struct FoldResult {
  std::string protocol;
  std::string fold_id;
  std::string arm = kArmMatching;
  std::uint32_t subject = 0;
  std::uint32_t train_session = 0;
  std::uint32_t test_session = 0;
  std::size_t n_shot = 0;
  std::size_t n_train = 0;
  std::size_t n_adapt = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
  /// Shape of the head weight, e.g. "[8, 3]" for a 3-way linear head.
  std::string head_shape;
  bool uses_bank = false;
};

struct ExperimentResult {
  std::string protocol;
  std::vector<FoldResult> folds;
  std::string bank_hash_before;
  std::string bank_hash_after;
};

/// Featurized data, bank and configuration shared by every fold.
struct ExperimentInputs {
  const feat::FeatureSet& features;
  const text::TextBank& bank;
  RunConfig cfg;
  /// Folds run on this many threads; results keep plan order.
  std::size_t jobs = 1;
};

/// Normalisation statistics over train + adapt, then training (skipped when
/// both are empty) and test accuracy. The model seed derives from the run
/// seed and the plan descriptor, so both heads start from the same encoder.
FoldResult run_plan(const ExperimentInputs& in, const SplitPlan& plan, model::HeadKind head,
                    std::size_t n_shot = 0);

ExperimentResult run_loso(const ExperimentInputs& in);
ExperimentResult run_cross_time(const ExperimentInputs& in);

/// For every LOSO fold and every N in cfg.n_shots: N samples per class of
/// the held-out subject form the adapt set and the rest is tested. Source
/// subjects are trained on only when cfg.source_training is set, so N = 0
/// without it is an untrained encoder matched against the bank.
ExperimentResult run_nshot(const ExperimentInputs& in);
std::vector<SplitPlan> nshot_plans(const ExperimentInputs& in);

/// Both heads on the same LOSO folds.
ExperimentResult run_ablation(const ExperimentInputs& in);

/// Mean/std of accuracy grouped by what the protocol varies: session (loso),
/// session pair (cross_time), N (nshot) or arm (ablation).
nlohmann::json summarize(const ExperimentResult& result);

}  // namespace eegclip::train
