#include "eegclip/io/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegclip/bands.hpp"
#include "eegclip/error.hpp"
#include "eegclip/hash.hpp"

namespace eegclip::io {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, "synth." + field + ": " + why);
}

}  // namespace

std::size_t SynthConfig::samples_per_trial() const {
  return static_cast<std::size_t>(std::llround(trial_seconds * fs));
}

void SynthConfig::validate() const {
  if (n_subjects == 0) bad("n_subjects", "must be positive");
  if (n_sessions == 0) bad("n_sessions", "must be positive");
  if (trials_per_class == 0) bad("trials_per_class", "must be positive");
  if (label_set.size() < 2) bad("label_set", "needs at least two labels");
  if (channels == 0) bad("channels", "must be positive");
  const auto bands = default_bands();
  if (!(fs >= 2.0 * bands.back().high_hz)) {
    bad("fs", "sampling rate below Nyquist for configured bands");
  }
  if (!(trial_seconds > 0.0)) bad("trial_seconds", "must be positive");
  const double n = trial_seconds * fs;
  if (std::abs(n - std::round(n)) > 1e-9) bad("trial_seconds", "trial_seconds * fs must be integral");
  if (!(subject_jitter >= 0.0 && subject_jitter < 1.0)) bad("subject_jitter", "must lie in [0, 1)");
  if (!(noise_floor >= 0.0)) bad("noise_floor", "must be non-negative");
  if (!(base_amplitude > 0.0)) bad("base_amplitude", "must be positive");
  for (const auto& label : label_set) {
    auto it = band_signature.find(label);
    if (it == band_signature.end()) bad("band_signature", "no entry for label '" + label + "'");
    if (it->second.band_index >= bands.size()) {
      bad("band_signature." + label, "band index must be < " + std::to_string(bands.size()));
    }
    if (!(it->second.boost > 1.0)) bad("band_signature." + label, "power boost factor must be > 1");
  }
  for (const auto& [label, _] : band_signature) {
    if (std::find(label_set.begin(), label_set.end(), label) == label_set.end()) {
      bad("band_signature", "label '" + label + "' is not in label_set");
    }
  }
}

void to_json(nlohmann::json& j, const SynthConfig& cfg) {
  nlohmann::json sig = nlohmann::json::object();
  for (const auto& [label, bb] : cfg.band_signature) {
    sig[label] = {{"band", bb.band_index}, {"boost", bb.boost}};
  }
  j = {{"n_subjects", cfg.n_subjects},         {"n_sessions", cfg.n_sessions},
       {"trials_per_class", cfg.trials_per_class}, {"label_set", cfg.label_set},
       {"fs", cfg.fs},                         {"trial_seconds", cfg.trial_seconds},
       {"band_signature", sig},                {"subject_jitter", cfg.subject_jitter},
       {"noise_floor", cfg.noise_floor},       {"base_amplitude", cfg.base_amplitude},
       {"channels", cfg.channels},             {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& cfg) {
  static const std::set<std::string> known = {
      "n_subjects",  "n_sessions",     "trials_per_class", "label_set",
      "fs",          "trial_seconds",  "band_signature",   "subject_jitter",
      "noise_floor", "base_amplitude", "channels",         "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) bad(key, "unknown field");
  }
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const nlohmann::json::exception& e) {
      bad(key, e.what());
    }
  };
  get("n_subjects", cfg.n_subjects);
  get("n_sessions", cfg.n_sessions);
  get("trials_per_class", cfg.trials_per_class);
  get("label_set", cfg.label_set);
  get("fs", cfg.fs);
  get("trial_seconds", cfg.trial_seconds);
  get("subject_jitter", cfg.subject_jitter);
  get("noise_floor", cfg.noise_floor);
  get("base_amplitude", cfg.base_amplitude);
  get("channels", cfg.channels);
  get("seed", cfg.seed);
  if (j.contains("band_signature")) {
    cfg.band_signature.clear();
    for (const auto& [label, v] : j.at("band_signature").items()) {
      try {
        cfg.band_signature[label] = {v.at("band").get<std::size_t>(), v.at("boost").get<double>()};
      } catch (const nlohmann::json::exception& e) {
        bad("band_signature." + label, e.what());
      }
    }
  }
}

RecordingSet generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const auto bands = default_bands();
  const std::size_t n_samples = cfg.samples_per_trial();
  const std::size_t n_bands = bands.size();

  RecordingSet set;
  set.label_set = cfg.label_set;
  set.channel_names = cfg.channels == kDefaultChannels ? seed_channel_names()
                                                       : std::vector<std::string>{};
  if (set.channel_names.empty()) {
    for (std::size_t c = 0; c < cfg.channels; ++c) set.channel_names.push_back("CH" + std::to_string(c + 1));
  }
  {
    std::ostringstream os;
    nlohmann::json j = cfg;
    os << "synthetic " << j.dump();
    set.meta = os.str();
  }

  for (std::size_t s = 1; s <= cfg.n_subjects; ++s) {
    std::mt19937_64 subject_rng(seed_mix(cfg.seed, {s}));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> subject_gain(n_bands);
    for (auto& g : subject_gain) g = 1.0 + cfg.subject_jitter * unit(subject_rng);

    for (std::size_t sess = 1; sess <= cfg.n_sessions; ++sess) {
      std::uint32_t trial_id = 1;
      for (std::size_t li = 0; li < cfg.label_set.size(); ++li) {
        const auto& label = cfg.label_set[li];
        const BandBoost sig = cfg.band_signature.at(label);
        for (std::size_t k = 0; k < cfg.trials_per_class; ++k, ++trial_id) {
          std::mt19937_64 rng(seed_mix(cfg.seed, {s, sess, li, k, 0xeeULL}));
          std::uniform_real_distribution<double> u01(0.0, 1.0);
          std::normal_distribution<double> noise(0.0, 1.0);

          Trial t;
          t.subject_id = static_cast<std::uint32_t>(s);
          t.session_id = static_cast<std::uint32_t>(sess);
          t.trial_id = trial_id;
          t.label = label;
          t.channels = cfg.channels;
          t.samples = n_samples;
          t.fs = cfg.fs;
          t.data.resize(cfg.channels * n_samples);

          std::vector<double> amp(n_bands), freq(n_bands), phase(n_bands);
          for (std::size_t c = 0; c < cfg.channels; ++c) {
            for (std::size_t b = 0; b < n_bands; ++b) {
              const double margin = 0.2 * bands[b].width();
              freq[b] = bands[b].low_hz + margin + u01(rng) * (bands[b].width() - 2.0 * margin);
              phase[b] = 2.0 * std::numbers::pi * u01(rng);
              amp[b] = cfg.base_amplitude * subject_gain[b] *
                       (b == sig.band_index ? std::sqrt(sig.boost) : 1.0);
            }
            float* row = t.data.data() + c * n_samples;
            for (std::size_t n = 0; n < n_samples; ++n) {
              const double time = static_cast<double>(n) / cfg.fs;
              double v = cfg.noise_floor * noise(rng);
              for (std::size_t b = 0; b < n_bands; ++b) {
                v += amp[b] * std::sin(2.0 * std::numbers::pi * freq[b] * time + phase[b]);
              }
              row[n] = static_cast<float>(v);
            }
          }
          set.trials.push_back(std::move(t));
        }
      }
    }
  }
  return set;
}

}  // namespace eegclip::io
