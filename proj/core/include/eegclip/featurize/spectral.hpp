#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eegclip/bands.hpp"

namespace eegclip::feat {

enum class PsdEstimator { kPeriodogram, kWelch };

struct PsdOptions {
  PsdEstimator estimator = PsdEstimator::kWelch;
  double segment_seconds = 0.5;
  double overlap = 0.5;

  bool operator==(const PsdOptions&) const = default;
};

/// One-sided power spectral density (power per Hz), bins 0..L/2 spaced fs/L.
struct Spectrum {
  std::vector<double> density;
  double df = 0.0;
  double fs = 0.0;
};

/// Welch: Hann-windowed, mean-detrended segments, averaged periodograms.
/// Periodogram: single rectangular segment over the whole window.
Spectrum estimate_psd(std::span<const double> x, double fs, const PsdOptions& opts = {});

/// Power in [low, high]. Each bin carries mass density*df spread uniformly
/// over [f - df/2, f + df/2] clipped to [0, fs/2], so a partition of the
/// spectrum sums to the total estimated power.
double integrate_band(const Spectrum& spectrum, double low_hz, double high_hz);

double band_power_psd(std::span<const double> window, const Band& band, double fs,
                      const PsdOptions& opts = {});

/// Natural-log differential entropy of a Gaussian with the window's unbiased
/// sample variance, floored at `variance_floor`.
double differential_entropy(std::span<const double> window, double variance_floor = 1e-12);

}  // namespace eegclip::feat
