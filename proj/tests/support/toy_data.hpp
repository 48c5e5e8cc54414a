#pragma once
// Small synthetic datasets run through the library pipeline.

#include <vector>

#include "eegclip/featurize/featurize.hpp"
#include "eegclip/io/synthetic.hpp"
#include "eegclip/training/trainer.hpp"

namespace toy {

inline eegclip::io::SynthConfig synth(std::size_t subjects, std::size_t sessions, std::size_t trials_per_class,
                                      double seconds = 8.0, std::uint64_t seed = 7) {
  eegclip::io::SynthConfig cfg;
  cfg.n_subjects = subjects;
  cfg.n_sessions = sessions;
  cfg.trials_per_class = trials_per_class;
  cfg.trial_seconds = seconds;
  cfg.seed = seed;
  return cfg;
}

inline eegclip::feat::FeatureSet features(const eegclip::io::SynthConfig& cfg,
                                          const eegclip::feat::FeaturizeConfig& fc = eegclip::feat::FeaturizeConfig::toy()) {
  return eegclip::feat::frame_features(eegclip::io::generate_synthetic(cfg), fc);
}

inline std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace toy
