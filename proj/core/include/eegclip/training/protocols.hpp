#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegclip/featurize/featurize.hpp"

namespace eegclip::train {

struct SampleMeta {
  std::uint32_t subject = 0;
  std::uint32_t session = 0;
  std::size_t label = 0;
};

std::vector<SampleMeta> sample_meta(const feat::FeatureSet& features);

/// Index sets into one sample collection.
struct SplitPlan {
  std::string protocol;  // loso, cross_time or nshot
  std::string fold_id;
  std::uint32_t subject = 0;  // held-out subject (loso) or the subject (cross_time)
  std::uint32_t train_session = 0;
  std::uint32_t test_session = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> adapt;
  std::vector<std::size_t> test;

  std::string descriptor() const { return protocol + ":" + fold_id; }
  bool operator==(const SplitPlan&) const = default;
};

/// Per session (ascending), one fold per subject (ascending): that subject's
/// samples are the test set, every other subject's same-session samples train.
std::vector<SplitPlan> loso_folds(std::span<const SampleMeta> samples);

/// Per subject, three plans over its three lowest sessions a < b < c:
/// (a -> b), (a -> c), (b -> c).
std::vector<SplitPlan> cross_time_folds(std::span<const SampleMeta> samples);

struct AdaptSplit {
  std::vector<std::size_t> adapt;
  std::vector<std::size_t> test;
};

/// Draws exactly N samples of every class in [0, num_classes) from `pool`
/// without replacement; the rest stay in test. Throws when a class has fewer
/// than N samples.
AdaptSplit nshot_sample(std::span<const SampleMeta> samples, std::span<const std::size_t> pool, std::size_t n,
                        std::size_t num_classes, std::uint64_t seed);

/// Throws Error(kInvalidArgument) on overlapping sets, a held-out subject on
/// the training side (loso, nshot) or shared sessions (cross_time).
void check_split(const SplitPlan& plan, std::span<const SampleMeta> samples);

}  // namespace eegclip::train
