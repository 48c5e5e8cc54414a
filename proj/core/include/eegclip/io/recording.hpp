#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eegclip::io {

inline constexpr std::string_view kRecordingMagic = "EEGC";
inline constexpr std::uint32_t kRecordingSchemaVersion = 1;
inline constexpr std::size_t kDefaultChannels = 62;
inline constexpr double kDefaultFs = 200.0;
inline constexpr double kDefaultBandCeilingHz = 75.0;

struct Trial {
  std::uint32_t subject_id = 1;
  std::uint32_t session_id = 1;
  std::uint32_t trial_id = 1;
  std::string label;
  std::size_t channels = 0;
  std::size_t samples = 0;
  double fs = kDefaultFs;
  /// channels x samples, channel-major, microvolts.
  std::vector<float> data;

  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(data).subspan(c * samples, samples);
  }
  double seconds() const { return static_cast<double>(samples) / fs; }
  std::string describe() const;

  bool operator==(const Trial&) const = default;
};

struct RecordingSet {
  std::vector<Trial> trials;
  std::vector<std::string> label_set;
  std::vector<std::string> channel_names;
  std::string meta;

  /// Position of `label` in label_set; throws Error(kUnknownLabel) when absent.
  std::size_t label_index(std::string_view label) const;

  bool operator==(const RecordingSet&) const = default;
};

struct ValidationOptions {
  /// 0 accepts any count as long as it matches channel_names.
  std::size_t expected_channels = kDefaultChannels;
  double band_ceiling_hz = kDefaultBandCeilingHz;
};

/// The 62 electrode names in the ESI NeuroScan order used by SEED exports.
std::vector<std::string> seed_channel_names();

/// Throws eegclip::Error naming the offending trial on the first violated invariant.
void validate(const RecordingSet& set, const ValidationOptions& opts = {});

std::string serialize_recording(const RecordingSet& set);
RecordingSet parse_recording(std::string_view bytes, const ValidationOptions& opts = {});

void save_recording(const RecordingSet& set, const std::filesystem::path& path);
RecordingSet load_recording(const std::filesystem::path& path, const ValidationOptions& opts = {});

}  // namespace eegclip::io
