#include "eegclip/featurize/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "eegclip/error.hpp"

namespace eegclip::feat {

using cd = std::complex<double>;

BandpassFilter::BandpassFilter(double low_hz, double high_hz, double fs, int order)
    : low_(low_hz), high_(high_hz), fs_(fs) {
  if (!(fs > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "bandpass: band edges must satisfy 0 < low < high < fs/2 (low=" +
                    std::to_string(low_hz) + ", high=" + std::to_string(high_hz) +
                    ", fs=" + std::to_string(fs) + ")");
  }
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "bandpass: order must be >= 1");

  const double pi = std::numbers::pi;
  const double wl = 2.0 * fs * std::tan(pi * low_hz / fs);
  const double wh = 2.0 * fs * std::tan(pi * high_hz / fs);
  const double bw = wh - wl;
  const double w0sq = wl * wh;

  std::vector<cd> zpoles;
  for (int k = 0; k < order; ++k) {
    const cd p = std::polar(1.0, pi * (2.0 * k + order + 1) / (2.0 * order));
    const cd a = p * bw / 2.0;
    const cd d = std::sqrt(a * a - w0sq);
    for (const cd s : {a + d, a - d}) {
      zpoles.push_back((2.0 * fs + s) / (2.0 * fs - s));
    }
  }
  // Conjugate pairs: keep the upper half-plane member of each pair.
  std::vector<cd> upper;
  for (const auto& z : zpoles) {
    if (z.imag() > 0.0) upper.push_back(z);
  }
  if (upper.size() != static_cast<std::size_t>(order)) {
    throw Error(ErrorCode::kInvalidArgument, "bandpass: unexpected real poles for this design");
  }
  std::sort(upper.begin(), upper.end(),
            [](const cd& x, const cd& y) { return std::abs(x) < std::abs(y); });
  for (const auto& z : upper) {
    Biquad q;
    q.b0 = 1.0;
    q.b1 = 0.0;
    q.b2 = -1.0;
    q.a1 = -2.0 * z.real();
    q.a2 = std::norm(z);
    sections_.push_back(q);
  }
  const double center = 2.0 * std::atan(std::sqrt(w0sq) / (2.0 * fs)) * fs / (2.0 * pi);
  const double g = 1.0 / std::abs(response(center));
  const double per = std::pow(g, 1.0 / static_cast<double>(sections_.size()));
  for (auto& q : sections_) {
    q.b0 *= per;
    q.b1 *= per;
    q.b2 *= per;
  }
}

std::complex<double> BandpassFilter::response(double freq_hz) const {
  const cd zinv = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs_);
  const cd zinv2 = zinv * zinv;
  cd h = 1.0;
  for (const auto& q : sections_) {
    h *= (q.b0 + q.b1 * zinv + q.b2 * zinv2) / (1.0 + q.a1 * zinv + q.a2 * zinv2);
  }
  return h;
}

std::vector<double> BandpassFilter::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& q : sections_) {
    double s1 = 0.0, s2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
  return y;
}

void BandpassFilter::run_pass(std::vector<double>& y) const {
  // Initial state = steady state for a constant input equal to y[0].
  double level = y.empty() ? 0.0 : y.front();
  for (const auto& q : sections_) {
    const double gain = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    double s2 = (q.b2 - q.a2 * gain) * level;
    double s1 = (q.b1 - q.a1 * gain) * level + s2;
    for (auto& v : y) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
    level *= gain;
  }
}

std::vector<double> BandpassFilter::filtfilt(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n < min_length()) {
    throw Error(ErrorCode::kInvalidArgument, "bandpass: series too short (" + std::to_string(n) +
                                                 " < " + std::to_string(min_length()) + ")");
  }
  // Pad by roughly three periods of the low edge, bounded by the signal itself.
  const auto wanted = static_cast<std::size_t>(std::ceil(3.0 * fs_ / low_));
  const std::size_t pad = std::min(n - 1, std::max(min_length(), wanted));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_pass(ext);
  std::reverse(ext.begin(), ext.end());
  run_pass(ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

const BandpassFilter& cached_bandpass(double low_hz, double high_hz, double fs) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double>, std::unique_ptr<BandpassFilter>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{low_hz, high_hz, fs}];
  if (!slot) slot = std::make_unique<BandpassFilter>(low_hz, high_hz, fs);
  return *slot;
}

}  // namespace eegclip::feat
