#include "eegclip/featurize/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>

#include "eegclip/error.hpp"

namespace eegclip::feat {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is.
fftw_plan r2c_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                     reinterpret_cast<fftw_complex*>(out.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(n, p);
  return p;
}

}  // namespace

Spectrum estimate_psd(std::span<const double> x, double fs, const PsdOptions& opts) {
  if (!(fs > 0.0)) throw Error(ErrorCode::kInvalidArgument, "psd: fs must be positive");
  std::size_t seg = x.size();
  std::size_t step = seg;
  const bool welch = opts.estimator == PsdEstimator::kWelch;
  if (welch) {
    seg = static_cast<std::size_t>(std::llround(opts.segment_seconds * fs));
    if (seg < 2) throw Error(ErrorCode::kInvalidArgument, "psd: segment shorter than 2 samples");
    if (!(opts.overlap >= 0.0 && opts.overlap < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "psd: overlap must lie in [0, 1)");
    }
    step = seg - static_cast<std::size_t>(std::llround(opts.overlap * static_cast<double>(seg)));
    step = std::max<std::size_t>(step, 1);
  }
  if (x.size() < seg || seg < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "psd: window of " + std::to_string(x.size()) + " samples is shorter than the " +
                    std::to_string(seg) + "-sample estimator segment");
  }

  std::vector<double> taper(seg, 1.0);
  if (welch) {
    for (std::size_t i = 0; i < seg; ++i) {
      taper[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(seg));
    }
  }
  double taper_energy = 0.0;
  for (double w : taper) taper_energy += w * w;

  const std::size_t bins = seg / 2 + 1;
  Spectrum out;
  out.fs = fs;
  out.df = fs / static_cast<double>(seg);
  out.density.assign(bins, 0.0);

  fftw_plan plan = r2c_plan(seg);
  std::vector<double> buf(seg);
  std::vector<std::complex<double>> spec(bins);
  std::size_t count = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += step, ++count) {
    double mean = 0.0;
    if (welch) {
      for (std::size_t i = 0; i < seg; ++i) mean += x[start + i];
      mean /= static_cast<double>(seg);
    }
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (x[start + i] - mean) * taper[i];
    fftw_execute_dft_r2c(plan, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    for (std::size_t k = 0; k < bins; ++k) out.density[k] += std::norm(spec[k]);
  }
  const double scale = 1.0 / (fs * taper_energy * static_cast<double>(count));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (seg % 2 == 0 && k == bins - 1);
    out.density[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

double integrate_band(const Spectrum& spectrum, double low_hz, double high_hz) {
  const double nyquist = spectrum.fs / 2.0;
  if (!(low_hz >= 0.0) || !(high_hz <= nyquist + 1e-12) || !(low_hz < high_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "band_power_psd: band outside [0, fs/2]");
  }
  const double df = spectrum.df;
  double power = 0.0;
  for (std::size_t k = 0; k < spectrum.density.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    const double lo = std::max(0.0, f - df / 2.0);
    const double hi = std::min(nyquist, f + df / 2.0);
    if (hi <= lo) continue;
    const double overlap = std::min(hi, high_hz) - std::max(lo, low_hz);
    if (overlap <= 0.0) continue;
    power += spectrum.density[k] * df * overlap / (hi - lo);
  }
  return power;
}

double band_power_psd(std::span<const double> window, const Band& band, double fs,
                      const PsdOptions& opts) {
  if (!(band.low_hz >= 0.0) || !(band.high_hz <= fs / 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "band_power_psd: band outside [0, fs/2]");
  }
  return integrate_band(estimate_psd(window, fs, opts), band.low_hz, band.high_hz);
}

double differential_entropy(std::span<const double> window, double variance_floor) {
  if (window.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "differential_entropy: window needs >= 2 samples");
  }
  const double n = static_cast<double>(window.size());
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : window) ss += (v - mean) * (v - mean);
  const double var = std::max(ss / (n - 1.0), variance_floor);
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var);
}

}  // namespace eegclip::feat
