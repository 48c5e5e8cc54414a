#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eegclip/bands.hpp"
#include "eegclip/featurize/layout.hpp"
#include "eegclip/featurize/spectral.hpp"
#include "eegclip/io/recording.hpp"

namespace eegclip::feat {

struct BandSet {
  std::vector<Band> bands = default_bands();

  std::size_t size() const { return bands.size(); }
  /// low < high, ordered by low edge, 0 < low, high < fs/2.
  void validate(double fs) const;
  bool operator==(const BandSet&) const = default;
};

struct FeaturizeConfig {
  BandSet band_set;
  ElectrodeLayout layout = ElectrodeLayout::seed62();
  double window_seconds = 1.0;
  std::size_t frames_per_sample = 5;
  std::size_t out_h = 32;
  std::size_t out_w = 32;
  PsdOptions psd;
  double de_floor = 1e-12;

  /// Smaller grid and shorter temporal blocks for desk-scale experiments.
  static FeaturizeConfig toy();

  std::size_t window_samples(double fs) const;
  void validate(double fs) const;
  bool operator==(const FeaturizeConfig&) const = default;
};

void to_json(nlohmann::json& j, const FeaturizeConfig& cfg);
/// Fields absent from `j` keep the values already in `cfg`.
void from_json(const nlohmann::json& j, FeaturizeConfig& cfg);

/// Row-major 2D grid.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Dense T x F x H x W tensor.
struct Volume4 {
  std::size_t frames = 0, bands = 0, height = 0, width = 0;
  std::vector<double> values;

  std::size_t index(std::size_t t, std::size_t f, std::size_t h, std::size_t w) const {
    return ((t * bands + f) * height + h) * width + w;
  }
  double at(std::size_t t, std::size_t f, std::size_t h, std::size_t w) const {
    return values[index(t, f, h, w)];
  }
  bool operator==(const Volume4&) const = default;
};

/// Model input: paired DE and PSD volumes with provenance.
struct Sample4D {
  Volume4 de;
  Volume4 psd;
  std::string label;
  std::size_t label_index = 0;
  std::uint32_t subject_id = 0;
  std::uint32_t session_id = 0;
  std::uint32_t trial_id = 0;
  std::size_t block = 0;

  bool operator==(const Sample4D&) const = default;
};

/// F x C feature matrices for one window (row f, column c).
struct FeatureMaps {
  std::size_t bands = 0;
  std::size_t channels = 0;
  std::vector<double> de;
  std::vector<double> psd;

  double de_at(std::size_t f, std::size_t c) const { return de[f * channels + c]; }
  double psd_at(std::size_t f, std::size_t c) const { return psd[f * channels + c]; }
};

/// Un-normalised channel-level features for one temporal block: T x F x C.
struct FramedFeatures {
  std::size_t frames = 0, bands = 0, channels = 0;
  std::vector<double> de;
  std::vector<double> psd;
  std::string label;
  std::size_t label_index = 0;
  std::uint32_t subject_id = 0;
  std::uint32_t session_id = 0;
  std::uint32_t trial_id = 0;
  std::size_t block = 0;

  bool operator==(const FramedFeatures&) const = default;
};

/// All blocks of a recording plus what is needed to grid them.
struct FeatureSet {
  FeaturizeConfig config;
  std::vector<std::string> channel_names;
  std::vector<std::string> label_set;
  std::vector<std::size_t> cells;
  std::vector<FramedFeatures> items;

  bool operator==(const FeatureSet&) const = default;
};

/// Per-band z-score statistics over channels and frames, DE and PSD separately.
struct NormStats {
  std::vector<double> de_mean, de_std, psd_mean, psd_std;

  bool operator==(const NormStats&) const = default;
};

std::vector<double> bandpass(std::span<const double> signal, const Band& band, double fs);

/// `window` is channels x samples, channel-major. DE on the band-passed
/// series; PSD as ln(max(band power, de_floor)) of the raw window.
FeatureMaps feature_frame(std::span<const double> window, std::size_t channels, const FeaturizeConfig& cfg,
                          double fs);

/// `values` in layout placement order.
Grid map_to_grid(std::span<const double> values, const ElectrodeLayout& layout);

/// Align-corners bilinear interpolation.
Grid upsample_bilinear(const Grid& grid, std::size_t out_h, std::size_t out_w);

/// Trial-level filtering followed by non-overlapping framing. Trials are
/// processed independently; `jobs` > 1 uses worker threads without changing
/// any result bit.
FeatureSet frame_features(const io::RecordingSet& set, const FeaturizeConfig& cfg, std::size_t jobs = 1);

/// Statistics over the selected items (all when `indices` is empty).
NormStats compute_norm_stats(const FeatureSet& features, std::span<const std::size_t> indices = {});

Sample4D assemble_sample(const FeatureSet& features, const FramedFeatures& item, const NormStats& stats);

std::vector<Sample4D> assemble_samples(const FeatureSet& features, std::span<const std::size_t> indices,
                                       const NormStats& stats);

/// frame_features + normalisation (given stats, or computed over the whole
/// set when none are supplied) + gridding + upsampling.
std::vector<Sample4D> build_samples(const io::RecordingSet& set, const FeaturizeConfig& cfg,
                                    const NormStats* stats = nullptr);

}  // namespace eegclip::feat
