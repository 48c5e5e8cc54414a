#include <benchmark/benchmark.h>

#include "common.hpp"
#include "eegclip/autodiff/ops.hpp"

using namespace eegclip;

static void BM_Conv2dForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = bm::random_tensor({8, 6, n, n}, 1);
  const auto k = bm::random_tensor({16, 6, 3, 3}, 2);
  const auto b = bm::random_tensor({16}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ad::conv2d(x, k, b, {.stride = 1, .padding = 1}));
}
BENCHMARK(BM_Conv2dForward)->Arg(12)->Arg(32);

static void BM_Conv2dBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto x = bm::random_tensor({8, 6, n, n}, 1, true);
  auto k = bm::random_tensor({16, 6, 3, 3}, 2, true);
  auto b = bm::random_tensor({16}, 3, true);
  for (auto _ : state) {
    ad::backward(ad::sum(ad::conv2d(x, k, b, {.stride = 1, .padding = 1})));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(12)->Arg(32);

static void BM_MatmulBatched(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = bm::random_tensor({16, d, d}, 4);
  const auto b = bm::random_tensor({16, d, d}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
}
BENCHMARK(BM_MatmulBatched)->Arg(16)->Arg(64)->Arg(128);

static void BM_Softmax(benchmark::State& state) {
  const auto x = bm::random_tensor({64, 64, 64}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ad::softmax(x));
}
BENCHMARK(BM_Softmax);
