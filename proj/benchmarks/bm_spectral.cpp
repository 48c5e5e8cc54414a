#include <benchmark/benchmark.h>

#include "common.hpp"
#include "eegclip/bands.hpp"
#include "eegclip/featurize/featurize.hpp"
#include "eegclip/featurize/spectral.hpp"
#include "eegclip/io/synthetic.hpp"

using namespace eegclip;

static void BM_Bandpass(benchmark::State& state) {
  const auto x = bm::gaussian(static_cast<std::size_t>(state.range(0)), 1);
  const auto band = default_bands()[2];
  for (auto _ : state) benchmark::DoNotOptimize(feat::bandpass(x, band, 200.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bandpass)->Arg(200)->Arg(2000)->Arg(12000);

static void BM_Welch(benchmark::State& state) {
  const auto x = bm::gaussian(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(feat::estimate_psd(x, 200.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Welch)->Arg(200)->Arg(2000);

static void BM_DifferentialEntropy(benchmark::State& state) {
  const auto x = bm::gaussian(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(feat::differential_entropy(x, 1e-12));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DifferentialEntropy)->Arg(200)->Arg(100000);

// One subject, one trial per class, 62 channels.
static void BM_FrameFeatures(benchmark::State& state) {
  io::SynthConfig sc;
  sc.n_subjects = 1;
  sc.trials_per_class = 1;
  sc.trial_seconds = 4.0;
  const auto set = io::generate_synthetic(sc);
  const auto cfg = feat::FeaturizeConfig::toy();
  for (auto _ : state) benchmark::DoNotOptimize(feat::frame_features(set, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(set.trials.size()));
}
BENCHMARK(BM_FrameFeatures)->Unit(benchmark::kMillisecond);
