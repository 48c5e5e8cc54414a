#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eegclip/io/recording.hpp"

namespace eegclip::io {

struct BandBoost {
  std::size_t band_index = 0;
  /// Power multiplier applied to the label's signature band; must exceed 1.
  double boost = 4.0;
};

/// Class-conditional synthetic EEG. Every channel carries one sinusoid per
/// default band plus white noise; the label's signature band gets its power
/// multiplied by `boost`, and each (subject, band) pair gets a fixed gain
/// drawn from 1 +/- subject_jitter.
struct SynthConfig {
  std::size_t n_subjects = 2;
  std::size_t n_sessions = 1;
  std::size_t trials_per_class = 2;
  std::vector<std::string> label_set = {"negative", "neutral", "positive"};
  double fs = kDefaultFs;
  double trial_seconds = 10.0;
  std::map<std::string, BandBoost> band_signature = {
      {"negative", {1, 4.0}}, {"neutral", {2, 4.0}}, {"positive", {4, 4.0}}};
  double subject_jitter = 0.2;
  double noise_floor = 2.0;
  double base_amplitude = 10.0;
  std::size_t channels = kDefaultChannels;
  std::uint64_t seed = 7;

  std::size_t samples_per_trial() const;
  /// Throws Error(kInvalidConfig) with the offending field name.
  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& cfg);
void from_json(const nlohmann::json& j, SynthConfig& cfg);

RecordingSet generate_synthetic(const SynthConfig& cfg);

}  // namespace eegclip::io
