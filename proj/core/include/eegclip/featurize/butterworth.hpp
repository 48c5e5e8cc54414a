#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eegclip::feat {

struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth band-pass built from an analog low-pass prototype of
/// `order` poles, the low-pass to band-pass transform and a prewarped
/// bilinear transform. The result is `order` second-order sections with unit
/// gain at the geometric centre frequency.
class BandpassFilter {
 public:
  BandpassFilter(double low_hz, double high_hz, double fs, int order = 4);

  std::span<const Biquad> sections() const { return sections_; }
  double low_hz() const { return low_; }
  double high_hz() const { return high_; }
  double fs() const { return fs_; }

  /// Shortest input accepted by filtfilt.
  std::size_t min_length() const { return 3 * (2 * sections_.size() + 1); }

  /// Complex response of a single forward pass at `freq_hz`.
  std::complex<double> response(double freq_hz) const;

  /// Causal single pass, zero initial state.
  std::vector<double> filter(std::span<const double> x) const;

  /// Zero-phase forward-backward filtering with odd-extension padding and
  /// steady-state initial conditions. Output length equals input length.
  std::vector<double> filtfilt(std::span<const double> x) const;

 private:
  void run_pass(std::vector<double>& x) const;

  double low_, high_, fs_;
  std::vector<Biquad> sections_;
};

/// Shared, lazily-built filter for (low, high, fs) at order 4. Thread-safe.
const BandpassFilter& cached_bandpass(double low_hz, double high_hz, double fs);

}  // namespace eegclip::feat
