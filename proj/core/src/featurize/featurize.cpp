#include "eegclip/featurize/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "eegclip/error.hpp"
#include "eegclip/featurize/butterworth.hpp"

namespace eegclip::feat {

using nlohmann::json;

void BandSet::validate(double fs) const {
  if (bands.empty()) throw Error(ErrorCode::kInvalidConfig, "band_set: no bands");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    if (!(b.low_hz > 0.0) || !(b.low_hz < b.high_hz)) {
      throw Error(ErrorCode::kInvalidConfig, "band_set: band " + b.name + " needs 0 < low < high");
    }
    if (!(b.high_hz < fs / 2.0)) {
      throw Error(ErrorCode::kBelowNyquist,
                  "band_set: band " + b.name + " reaches fs/2; sampling rate below Nyquist for configured bands");
    }
    if (i > 0 && bands[i - 1].low_hz > b.low_hz) {
      throw Error(ErrorCode::kInvalidConfig, "band_set: bands must be ordered by low edge");
    }
  }
}

FeaturizeConfig FeaturizeConfig::toy() {
  FeaturizeConfig cfg;
  cfg.frames_per_sample = 2;
  cfg.out_h = 12;
  cfg.out_w = 12;
  return cfg;
}

std::size_t FeaturizeConfig::window_samples(double fs) const {
  return static_cast<std::size_t>(std::llround(window_seconds * fs));
}

void FeaturizeConfig::validate(double fs) const {
  band_set.validate(fs);
  layout.validate();
  if (!(window_seconds > 0.0)) throw Error(ErrorCode::kInvalidConfig, "featurize.window_seconds must be positive");
  const double n = window_seconds * fs;
  if (std::abs(n - std::round(n)) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "featurize.window_seconds * fs must be integral");
  }
  if (frames_per_sample == 0) throw Error(ErrorCode::kInvalidConfig, "featurize.frames_per_sample must be >= 1");
  if (out_h < layout.rows || out_w < layout.cols) {
    throw Error(ErrorCode::kInvalidConfig, "featurize.out_h/out_w must be at least the grid size");
  }
  if (!(de_floor > 0.0)) throw Error(ErrorCode::kInvalidConfig, "featurize.de_floor must be positive");
}

void to_json(json& j, const FeaturizeConfig& cfg) {
  json bands = json::array();
  for (const auto& b : cfg.band_set.bands) bands.push_back({{"name", b.name}, {"low", b.low_hz}, {"high", b.high_hz}});
  j = {{"bands", bands},
       {"layout", cfg.layout.to_text()},
       {"window_seconds", cfg.window_seconds},
       {"frames_per_sample", cfg.frames_per_sample},
       {"out_h", cfg.out_h},
       {"out_w", cfg.out_w},
       {"psd_estimator", cfg.psd.estimator == PsdEstimator::kWelch ? "welch" : "periodogram"},
       {"welch_segment_seconds", cfg.psd.segment_seconds},
       {"welch_overlap", cfg.psd.overlap},
       {"de_floor", cfg.de_floor}};
}

void from_json(const json& j, FeaturizeConfig& cfg) {
  static const std::vector<std::string> known = {
      "bands", "layout", "layout_file", "window_seconds", "frames_per_sample", "out_h", "out_w",
      "psd_estimator", "welch_segment_seconds", "welch_overlap", "de_floor"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::kInvalidConfig, "featurize." + key + ": unknown field");
    }
  }
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, std::string("featurize.") + key + ": " + e.what());
    }
  };
  if (j.contains("bands")) {
    cfg.band_set.bands.clear();
    for (const auto& b : j.at("bands")) {
      cfg.band_set.bands.push_back({b.at("name").get<std::string>(), b.at("low").get<double>(), b.at("high").get<double>()});
    }
  }
  if (j.contains("layout")) cfg.layout = ElectrodeLayout::parse(j.at("layout").get<std::string>());
  if (j.contains("layout_file")) cfg.layout = ElectrodeLayout::load(j.at("layout_file").get<std::string>());
  get("window_seconds", cfg.window_seconds);
  get("frames_per_sample", cfg.frames_per_sample);
  get("out_h", cfg.out_h);
  get("out_w", cfg.out_w);
  if (j.contains("psd_estimator")) {
    const auto name = j.at("psd_estimator").get<std::string>();
    if (name == "welch") cfg.psd.estimator = PsdEstimator::kWelch;
    else if (name == "periodogram") cfg.psd.estimator = PsdEstimator::kPeriodogram;
    else throw Error(ErrorCode::kInvalidConfig, "featurize.psd_estimator: expected welch or periodogram");
  }
  get("welch_segment_seconds", cfg.psd.segment_seconds);
  get("welch_overlap", cfg.psd.overlap);
  get("de_floor", cfg.de_floor);
}

std::vector<double> bandpass(std::span<const double> signal, const Band& band, double fs) {
  return cached_bandpass(band.low_hz, band.high_hz, fs).filtfilt(signal);
}

namespace {

double log_power(double p, double floor) { return std::log(std::max(p, floor)); }

}  // namespace

FeatureMaps feature_frame(std::span<const double> window, std::size_t channels, const FeaturizeConfig& cfg,
                          double fs) {
  const std::size_t n = cfg.window_samples(fs);
  if (channels == 0 || window.size() != channels * n) {
    throw Error(ErrorCode::kShapeMismatch, "feature_frame: window length must equal window_seconds * fs");
  }
  const auto& bands = cfg.band_set.bands;
  FeatureMaps maps;
  maps.bands = bands.size();
  maps.channels = channels;
  maps.de.resize(maps.bands * channels);
  maps.psd.resize(maps.bands * channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto x = window.subspan(c * n, n);
    const Spectrum spectrum = estimate_psd(x, fs, cfg.psd);
    for (std::size_t f = 0; f < bands.size(); ++f) {
      const auto y = bandpass(x, bands[f], fs);
      maps.de[f * channels + c] = differential_entropy(y, cfg.de_floor);
      maps.psd[f * channels + c] = log_power(integrate_band(spectrum, bands[f].low_hz, bands[f].high_hz), cfg.de_floor);
    }
  }
  return maps;
}

Grid map_to_grid(std::span<const double> values, const ElectrodeLayout& layout) {
  layout.validate();
  if (values.size() != layout.placements.size()) {
    throw Error(ErrorCode::kShapeMismatch, "map_to_grid: " + std::to_string(values.size()) + " values for " +
                                               std::to_string(layout.placements.size()) + " placements");
  }
  Grid g{layout.rows, layout.cols, std::vector<double>(layout.rows * layout.cols, 0.0)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    g.at(layout.placements[i].row, layout.placements[i].col) = values[i];
  }
  return g;
}

namespace {

struct Axis {
  std::vector<std::size_t> lo, hi;
  std::vector<double> frac;
};

Axis make_axis(std::size_t in, std::size_t out) {
  Axis a;
  a.lo.resize(out);
  a.hi.resize(out);
  a.frac.resize(out);
  for (std::size_t i = 0; i < out; ++i) {
    const double pos = out > 1 ? static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo > in - 1) lo = in - 1;
    a.lo[i] = lo;
    a.hi[i] = std::min(lo + 1, in - 1);
    a.frac[i] = pos - static_cast<double>(lo);
  }
  return a;
}

void upsample_into(const double* src, std::size_t in_h, std::size_t in_w, const Axis& ay, const Axis& ax,
                   double* dst) {
  const std::size_t out_h = ay.lo.size();
  const std::size_t out_w = ax.lo.size();
  for (std::size_t i = 0; i < out_h; ++i) {
    const double* r0 = src + ay.lo[i] * in_w;
    const double* r1 = src + ay.hi[i] * in_w;
    const double wy = ay.frac[i];
    for (std::size_t j = 0; j < out_w; ++j) {
      const double wx = ax.frac[j];
      const double top = r0[ax.lo[j]] + wx * (r0[ax.hi[j]] - r0[ax.lo[j]]);
      const double bot = r1[ax.lo[j]] + wx * (r1[ax.hi[j]] - r1[ax.lo[j]]);
      dst[i * out_w + j] = top + wy * (bot - top);
    }
  }
  (void)in_h;
}

}  // namespace

Grid upsample_bilinear(const Grid& grid, std::size_t out_h, std::size_t out_w) {
  if (grid.rows == 0 || grid.cols == 0 || out_h < grid.rows || out_w < grid.cols) {
    throw Error(ErrorCode::kInvalidArgument, "upsample_bilinear: output must be at least the input size");
  }
  Grid out{out_h, out_w, std::vector<double>(out_h * out_w)};
  upsample_into(grid.values.data(), grid.rows, grid.cols, make_axis(grid.rows, out_h), make_axis(grid.cols, out_w),
                out.values.data());
  return out;
}

namespace {

FramedFeatures empty_block(const io::Trial& t, std::size_t label_index, std::size_t frames, std::size_t bands,
                           std::size_t block) {
  FramedFeatures ff;
  ff.frames = frames;
  ff.bands = bands;
  ff.channels = t.channels;
  ff.de.resize(frames * bands * t.channels);
  ff.psd.resize(frames * bands * t.channels);
  ff.label = t.label;
  ff.label_index = label_index;
  ff.subject_id = t.subject_id;
  ff.session_id = t.session_id;
  ff.trial_id = t.trial_id;
  ff.block = block;
  return ff;
}

std::vector<FramedFeatures> featurize_trial(const io::Trial& t, std::size_t label_index,
                                            const FeaturizeConfig& cfg) {
  const std::size_t win = cfg.window_samples(t.fs);
  const std::size_t frames = cfg.frames_per_sample;
  const std::size_t windows = t.samples / win;
  const std::size_t blocks = windows / frames;
  if (blocks == 0) {
    throw Error(ErrorCode::kInsufficientData, t.describe() + ": trial shorter than one temporal block (" +
                                                  std::to_string(t.seconds()) + " s)");
  }
  const auto& bands = cfg.band_set.bands;
  const std::size_t nb = bands.size();
  const std::size_t nc = t.channels;
  std::vector<FramedFeatures> out;
  for (std::size_t b = 0; b < blocks; ++b) out.push_back(empty_block(t, label_index, frames, nb, b));

  std::vector<double> raw(t.samples);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto ch = t.channel(c);
    std::copy(ch.begin(), ch.end(), raw.begin());
    for (std::size_t w = 0; w < blocks * frames; ++w) {
      const Spectrum s = estimate_psd(std::span<const double>(raw).subspan(w * win, win), t.fs, cfg.psd);
      auto& ff = out[w / frames];
      const std::size_t frame = w % frames;
      for (std::size_t f = 0; f < nb; ++f) {
        ff.psd[(frame * nb + f) * nc + c] = log_power(integrate_band(s, bands[f].low_hz, bands[f].high_hz), cfg.de_floor);
      }
    }
    for (std::size_t f = 0; f < nb; ++f) {
      const auto y = bandpass(raw, bands[f], t.fs);
      for (std::size_t w = 0; w < blocks * frames; ++w) {
        auto& ff = out[w / frames];
        const std::size_t frame = w % frames;
        ff.de[(frame * nb + f) * nc + c] =
            differential_entropy(std::span<const double>(y).subspan(w * win, win), cfg.de_floor);
      }
    }
  }
  return out;
}

}  // namespace

FeatureSet frame_features(const io::RecordingSet& set, const FeaturizeConfig& cfg, std::size_t jobs) {
  FeatureSet fs;
  fs.config = cfg;
  fs.channel_names = set.channel_names;
  fs.label_set = set.label_set;
  fs.cells = cfg.layout.cells_for(set.channel_names);
  for (const auto& t : set.trials) cfg.validate(t.fs);

  std::vector<std::vector<FramedFeatures>> per_trial(set.trials.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < set.trials.size(); i += step) {
      per_trial[i] = featurize_trial(set.trials[i], set.label_index(set.trials[i].label), cfg);
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, set.trials.size()));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        try {
          work(j, jobs);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (auto& blocks : per_trial) {
    for (auto& b : blocks) fs.items.push_back(std::move(b));
  }
  return fs;
}

NormStats compute_norm_stats(const FeatureSet& features, std::span<const std::size_t> indices) {
  const std::size_t nb = features.config.band_set.size();
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(features.items.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    indices = all;
  }
  if (indices.empty()) throw Error(ErrorCode::kInsufficientData, "compute_norm_stats: no items");

  NormStats st;
  auto accumulate = [&](auto member, std::vector<double>& mean, std::vector<double>& sd) {
    std::vector<double> sum(nb, 0.0), sq(nb, 0.0), count(nb, 0.0);
    for (std::size_t idx : indices) {
      const auto& it = features.items.at(idx);
      const auto& v = it.*member;
      for (std::size_t t = 0; t < it.frames; ++t) {
        for (std::size_t f = 0; f < nb; ++f) {
          for (std::size_t c = 0; c < it.channels; ++c) {
            const double x = v[(t * nb + f) * it.channels + c];
            sum[f] += x;
            count[f] += 1.0;
          }
        }
      }
    }
    mean.resize(nb);
    for (std::size_t f = 0; f < nb; ++f) mean[f] = sum[f] / count[f];
    for (std::size_t idx : indices) {
      const auto& it = features.items.at(idx);
      const auto& v = it.*member;
      for (std::size_t t = 0; t < it.frames; ++t) {
        for (std::size_t f = 0; f < nb; ++f) {
          for (std::size_t c = 0; c < it.channels; ++c) {
            const double d = v[(t * nb + f) * it.channels + c] - mean[f];
            sq[f] += d * d;
          }
        }
      }
    }
    sd.resize(nb);
    for (std::size_t f = 0; f < nb; ++f) {
      const double s = std::sqrt(sq[f] / count[f]);
      sd[f] = s > 1e-12 ? s : 1.0;
    }
  };
  accumulate(&FramedFeatures::de, st.de_mean, st.de_std);
  accumulate(&FramedFeatures::psd, st.psd_mean, st.psd_std);
  return st;
}

Sample4D assemble_sample(const FeatureSet& features, const FramedFeatures& item, const NormStats& stats) {
  const auto& cfg = features.config;
  const std::size_t nb = item.bands;
  const std::size_t nc = item.channels;
  const std::size_t rows = cfg.layout.rows, cols = cfg.layout.cols;
  if (stats.de_mean.size() != nb || features.cells.size() != nc) {
    throw Error(ErrorCode::kShapeMismatch, "assemble_sample: stats or layout do not match features");
  }
  const Axis ay = make_axis(rows, cfg.out_h);
  const Axis ax = make_axis(cols, cfg.out_w);

  Sample4D s;
  for (Volume4* v : {&s.de, &s.psd}) {
    *v = Volume4{item.frames, nb, cfg.out_h, cfg.out_w, std::vector<double>(item.frames * nb * cfg.out_h * cfg.out_w)};
  }
  std::vector<double> grid(rows * cols);
  auto fill = [&](const std::vector<double>& src, const std::vector<double>& mean, const std::vector<double>& sd,
                  Volume4& dst) {
    for (std::size_t t = 0; t < item.frames; ++t) {
      for (std::size_t f = 0; f < nb; ++f) {
        std::fill(grid.begin(), grid.end(), 0.0);
        for (std::size_t c = 0; c < nc; ++c) {
          grid[features.cells[c]] = (src[(t * nb + f) * nc + c] - mean[f]) / sd[f];
        }
        upsample_into(grid.data(), rows, cols, ay, ax, dst.values.data() + dst.index(t, f, 0, 0));
      }
    }
  };
  fill(item.de, stats.de_mean, stats.de_std, s.de);
  fill(item.psd, stats.psd_mean, stats.psd_std, s.psd);
  s.label = item.label;
  s.label_index = item.label_index;
  s.subject_id = item.subject_id;
  s.session_id = item.session_id;
  s.trial_id = item.trial_id;
  s.block = item.block;
  return s;
}

std::vector<Sample4D> assemble_samples(const FeatureSet& features, std::span<const std::size_t> indices,
                                       const NormStats& stats) {
  std::vector<Sample4D> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(assemble_sample(features, features.items.at(i), stats));
  return out;
}

std::vector<Sample4D> build_samples(const io::RecordingSet& set, const FeaturizeConfig& cfg, const NormStats* stats) {
  const FeatureSet features = frame_features(set, cfg);
  const NormStats local = stats ? *stats : compute_norm_stats(features);
  std::vector<Sample4D> out;
  out.reserve(features.items.size());
  for (const auto& item : features.items) out.push_back(assemble_sample(features, item, local));
  return out;
}

}  // namespace eegclip::feat
