#include <benchmark/benchmark.h>

#include "common.hpp"
#include "eegclip/autodiff/ops.hpp"
#include "eegclip/model/emotion_clip.hpp"

using namespace eegclip;

namespace {

model::ModelConfig config_for(std::int64_t which) { return which == 0 ? model::ModelConfig::toy() : model::ModelConfig{}; }

model::Batch random_batch(const model::ModelConfig& cfg, std::size_t batch, std::size_t frames) {
  model::Batch b;
  b.de = bm::random_tensor({batch, frames, cfg.bands, cfg.input_h, cfg.input_w}, 1);
  b.psd = bm::random_tensor({batch, frames, cfg.bands, cfg.input_h, cfg.input_w}, 2);
  for (std::size_t i = 0; i < batch; ++i) b.targets.push_back(i % 3);
  return b;
}

const std::vector<std::string> kLabels = {"negative", "neutral", "positive"};

}  // namespace

// Arg 0: toy config, 1: default config.
static void BM_ModelForward(benchmark::State& state) {
  const auto cfg = config_for(state.range(0));
  model::EmotionClip clip(cfg, model::HeadKind::kMatching, 3, 1);
  const auto bank = text::build_bank_stub(kLabels, text::PromptTemplateSet::builtin(), cfg.proj_dim);
  const auto batch = random_batch(cfg, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(clip.logits(batch, &bank));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ModelForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_ModelTrainStep(benchmark::State& state) {
  const auto cfg = config_for(state.range(0));
  model::EmotionClip clip(cfg, model::HeadKind::kMatching, 3, 1);
  const auto bank = text::build_bank_stub(kLabels, text::PromptTemplateSet::builtin(), cfg.proj_dim);
  const auto batch = random_batch(cfg, 8, 2);
  std::mt19937_64 rng(3);
  model::ForwardOptions opts{.training = true, .rng = &rng};
  for (auto _ : state) {
    clip.params().zero_grad();
    ad::backward(ad::cross_entropy(clip.logits(batch, &bank, opts), batch.targets));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ModelTrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
