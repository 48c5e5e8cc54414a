// Writes containers and reference outputs for the Python cross-checks.
// Usage: oracle_fixtures OUT_DIR

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "eegclip/bands.hpp"
#include "eegclip/featurize/butterworth.hpp"
#include "eegclip/featurize/feature_cache.hpp"
#include "eegclip/featurize/featurize.hpp"
#include "eegclip/featurize/spectral.hpp"
#include "eegclip/io/recording.hpp"
#include "eegclip/io/synthetic.hpp"
#include "eegclip/text/text_bank.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace eegclip;
using nlohmann::json;

namespace {

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(1); }

json recording_json(const io::RecordingSet& set) {
  json trials = json::array();
  for (const auto& t : set.trials) {
    trials.push_back({{"subject", t.subject_id},
                      {"session", t.session_id},
                      {"trial", t.trial_id},
                      {"label", t.label},
                      {"fs", t.fs},
                      {"channels", t.channels},
                      {"samples", t.samples},
                      {"data", t.data}});
  }
  return {{"channel_names", set.channel_names}, {"label_set", set.label_set}, {"trials", trials}};
}

void containers(const fs::path& out) {
  const auto small = oracle::small_recording(2, 1, 3);
  io::save_recording(small, out / "recording.eegc");
  write_json(out / "recording.json", recording_json(small));

  io::SynthConfig sc;
  sc.n_subjects = 1;
  sc.trials_per_class = 1;
  sc.trial_seconds = 4.0;
  const auto synth = io::generate_synthetic(sc);
  io::save_recording(synth, out / "synth.eegc");
  const auto cfg = feat::FeaturizeConfig::toy();
  const auto features = feat::frame_features(synth, cfg);
  feat::save_features(features, out / "features.eegf");
  json items = json::array();
  for (const auto& it : features.items) {
    items.push_back({{"subject", it.subject_id},
                     {"trial", it.trial_id},
                     {"block", it.block},
                     {"label", it.label},
                     {"frames", it.frames},
                     {"bands", it.bands},
                     {"channels", it.channels},
                     {"de", it.de},
                     {"psd", it.psd}});
  }
  json bands = json::array();
  for (const auto& b : cfg.band_set.bands) bands.push_back({b.name, b.low_hz, b.high_hz});
  write_json(out / "features.json", {{"window_seconds", cfg.window_seconds},
                                     {"frames_per_sample", cfg.frames_per_sample},
                                     {"de_floor", cfg.de_floor},
                                     {"segment_seconds", cfg.psd.segment_seconds},
                                     {"overlap", cfg.psd.overlap},
                                     {"bands", bands},
                                     {"items", items}});
}

void spectral(const fs::path& out) {
  const double fs = 200.0;
  const auto x = oracle::gaussian(1000, 3.0, 5);
  json filters = json::array();
  for (const auto& b : default_bands()) {
    const auto& f = feat::cached_bandpass(b.low_hz, b.high_hz, fs);
    json sos = json::array();
    for (const auto& q : f.sections()) sos.push_back({q.b0, q.b1, q.b2, 1.0, q.a1, q.a2});
    filters.push_back({{"name", b.name},
                       {"low", b.low_hz},
                       {"high", b.high_hz},
                       {"sos", sos},
                       {"output", feat::bandpass(x, b, fs)}});
  }
  const auto welch = feat::estimate_psd(x, fs);
  feat::PsdOptions periodogram_opts;
  periodogram_opts.estimator = feat::PsdEstimator::kPeriodogram;
  const auto periodogram = feat::estimate_psd(x, fs, periodogram_opts);
  json band_power = json::array();
  for (const auto& b : default_bands()) band_power.push_back(feat::integrate_band(welch, b.low_hz, b.high_hz));
  write_json(out / "spectral.json", {{"fs", fs},
                                     {"input", x},
                                     {"filters", filters},
                                     {"welch", {{"segment", 100}, {"overlap", 50}, {"density", welch.density}}},
                                     {"periodogram", periodogram.density},
                                     {"welch_band_power", band_power}});
}

void text_bank(const fs::path& out) {
  const auto templates = text::PromptTemplateSet::builtin();
  text::EmbeddingFile file;
  file.labels = {"positive", "negative", "neutral"};  // file order differs from bank order
  file.templates = templates.templates;
  std::reverse(file.templates.begin(), file.templates.end());
  file.dim = 12;
  for (double v : oracle::random_values(3 * 16 * 12, 6)) file.values.push_back(static_cast<float>(v));
  text::save_embedding_file(file, out / "bank.eegt");
  const std::vector<std::string> labels = {"negative", "neutral", "positive"};
  const auto bank = text::build_bank_from_file(labels, templates, out / "bank.eegt");
  json rows = json::array();
  for (std::size_t k = 0; k < bank.size(); ++k) {
    rows.push_back(std::vector<double>(bank.vector(k).begin(), bank.vector(k).end()));
  }
  json prompts = json::object();
  for (const auto& l : labels) prompts[l] = text::render_prompts(l, templates);
  write_json(out / "bank.json",
             {{"labels", labels}, {"templates", templates.templates}, {"rows", rows}, {"prompts", prompts}});
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: oracle_fixtures OUT_DIR\n");
    return 2;
  }
  const fs::path out = argv[1];
  fs::create_directories(out);
  try {
    containers(out);
    spectral(out);
    text_bank(out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "oracle_fixtures: %s\n", e.what());
    return 1;
  }
  return 0;
}
