#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <set>

#include "eegclip/autodiff/grad_check.hpp"
#include "eegclip/autodiff/ops.hpp"
#include "eegclip/autodiff/parameters.hpp"
#include "eegclip/autodiff/tensor.hpp"
#include "eegclip/error.hpp"
#include "grad_suite.hpp"
#include "oracles.hpp"

using namespace eegclip;
using namespace eegclip::ad;

namespace {

Tensor rand_tensor(Shape shape, std::uint64_t seed, bool grad = true, double lo = -1.0, double hi = 1.0) {
  const auto n = numel(shape);
  return Tensor::from_values(std::move(shape), oracle::random_values(n, seed, lo, hi), grad);
}

/// sum(op(x) * w) with a fixed random w so every output coordinate matters.
Tensor weighted(const Tensor& y, std::uint64_t seed = 99) {
  return sum(mul(y, rand_tensor(y.shape(), seed, false)));
}

double check(const std::function<Tensor()>& f, Tensor& x) { return grad_check(f, x).max_relative_error; }

}  // namespace

TEST(Conv2d, IdentityKernelReturnsInput) {
  auto x = rand_tensor({1, 5, 5}, 1, false);
  auto k = Tensor::full({1, 1, 1, 1}, 1.0);
  const auto y = conv2d(x, k, Tensor{});
  ASSERT_EQ(y.shape(), (Shape{1, 5, 5}));
  for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv2d, OnesKernelCountsNine) {
  auto x = Tensor::full({1, 5, 5}, 1.0);
  auto k = Tensor::full({1, 1, 3, 3}, 1.0);
  const auto y = conv2d(x, k, Tensor{});
  ASSERT_EQ(y.shape(), (Shape{1, 3, 3}));
  for (double v : y.values()) EXPECT_EQ(v, 9.0);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
  struct Case {
    std::size_t stride, pad;
  };
  for (auto [s, p] : {Case{1, 0}, Case{1, 1}, Case{2, 1}, Case{2, 0}}) {
    auto x = rand_tensor({2, 5, 5}, 2, false);
    auto k = rand_tensor({3, 2, 3, 3}, 3, false);
    auto b = rand_tensor({3}, 4, false);
    const auto y = conv2d(x, k, b, {s, p});
    std::size_t oh = 0, ow = 0;
    const auto ref = oracle::conv2d({x.values().begin(), x.values().end()}, 2, 5, 5,
                                    {k.values().begin(), k.values().end()}, 3, 3,
                                    {b.values().begin(), b.values().end()}, s, p, oh, ow);
    ASSERT_EQ(y.shape(), (Shape{3, oh, ow}));
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.values()[i], ref[i], 1e-12);
  }
}

TEST(Conv2d, BatchedInputAndShapeErrors) {
  auto x = rand_tensor({2, 1, 4, 4}, 5, false);
  auto k = rand_tensor({2, 1, 3, 3}, 6, false);
  EXPECT_EQ(conv2d(x, k, Tensor{}, {1, 1}).shape(), (Shape{2, 2, 4, 4}));
  auto wrong = rand_tensor({2, 3, 3, 3}, 7, false);
  EXPECT_THROW(conv2d(x, wrong, Tensor{}), Error);
  auto big = rand_tensor({1, 1, 7, 7}, 8, false);
  EXPECT_THROW(conv2d(x, big, Tensor{}), Error);
}

TEST(Softmax, Examples) {
  auto a = softmax(Tensor::from_values({2}, {0.0, 0.0}));
  EXPECT_DOUBLE_EQ(a.values()[0], 0.5);
  EXPECT_DOUBLE_EQ(a.values()[1], 0.5);
  auto b = softmax(Tensor::from_values({3}, {std::log(1.0), std::log(2.0), std::log(3.0)}));
  EXPECT_NEAR(b.values()[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(b.values()[1], 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(b.values()[2], 3.0 / 6.0, 1e-15);
}

TEST(Softmax, ShiftInvariantAndNormalised) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto x = rand_tensor({4, 7}, seed, false, -5, 5);
    const double c = oracle::random_values(1, seed + 100, -50, 50)[0];
    auto shifted = add(x, Tensor::full({4, 7}, c));
    const auto p = softmax(x), q = softmax(shifted);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      EXPECT_NEAR(p.values()[i], q.values()[i], 1e-12);
      EXPECT_GT(p.values()[i], 0.0);
    }
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < 7; ++j) s += p.values()[r * 7 + j];
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  auto big = softmax(Tensor::from_values({2}, {1000.0, 0.0}));
  EXPECT_EQ(big.values()[0], 1.0);
}

TEST(Backward, SumGivesOnes) {
  auto x = rand_tensor({3, 4}, 1);
  backward(sum(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, HalfSquareGivesX) {
  auto x = rand_tensor({10}, 2);
  backward(scale(sum(mul(x, x)), 0.5));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(x.grad()[i], x.values()[i], 1e-12);
}

TEST(Backward, ConstantsReceiveNoGradient) {
  auto x = rand_tensor({5}, 3);
  auto c = rand_tensor({5}, 4, false);
  backward(sum(mul(x, c)));
  EXPECT_TRUE(x.has_grad());
  EXPECT_FALSE(c.has_grad());
}

TEST(Backward, SharedInputSumsBothContributions) {
  auto x = rand_tensor({6}, 5);
  auto w1 = rand_tensor({6}, 6, false), w2 = rand_tensor({6}, 7, false);
  backward(add(sum(mul(x, w1)), sum(exp(mul(x, w2)))));
  // Duplicated-input oracle: the same function of two independent copies.
  auto a = Tensor::from_values({6}, {x.values().begin(), x.values().end()}, true);
  auto b = Tensor::from_values({6}, {x.values().begin(), x.values().end()}, true);
  backward(add(sum(mul(a, w1)), sum(exp(mul(b, w2)))));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(x.grad()[i], a.grad()[i] + b.grad()[i], 1e-14);
}

TEST(Backward, EachNodeVisitedOnce) {
  auto x = rand_tensor({3}, 8);
  auto y = mul(x, x);
  auto z = add(y, y);
  const auto g = Graph::build(sum(z));
  std::set<Node*> seen(g.order().begin(), g.order().end());
  EXPECT_EQ(seen.size(), g.size());
  EXPECT_EQ(g.size(), 4u);
}

TEST(Backward, NonScalarLossIsRejected) {
  auto x = rand_tensor({3}, 9);
  EXPECT_THROW(backward(mul(x, x)), Error);
}

TEST(Backward, CycleIsDetected) {
  auto x = rand_tensor({2}, 10);
  auto y = exp(x);
  auto z = exp(y);
  y.node()->inputs.push_back(z.node_ptr());
  try {
    Graph::build(z);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGraph);
  }
  y.node()->inputs.pop_back();
}

TEST(Tensor, NonFiniteResultIsAHardError) {
  auto x = Tensor::from_values({1}, {1000.0});
  try {
    exp(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
  EXPECT_THROW(Tensor::from_values({2, 2}, {1.0}), Error);
}

TEST(Tensor, NoGradGuardSkipsRecording) {
  auto x = rand_tensor({3}, 11);
  NoGradGuard guard;
  EXPECT_FALSE(exp(x).requires_grad());
}

TEST(ForwardValues, MatmulMeanConcatPermute) {
  auto a = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = Tensor::from_values({3, 2}, {7, 8, 9, 10, 11, 12});
  const auto ab = matmul(a, b);
  EXPECT_EQ(std::vector<double>(ab.values().begin(), ab.values().end()), (std::vector<double>{58, 64, 139, 154}));
  auto m0 = mean(a, 0), m1 = mean(a, 1);
  EXPECT_EQ(m0.shape(), (Shape{3}));
  EXPECT_EQ(std::vector<double>(m1.values().begin(), m1.values().end()), (std::vector<double>{2, 5}));
  const Tensor parts[] = {a, a};
  EXPECT_EQ(concat(parts, 1).shape(), (Shape{2, 6}));
  EXPECT_EQ(concat(parts, 0).values()[6], 1.0);
  auto t = transpose(a);
  EXPECT_EQ(t.shape(), (Shape{3, 2}));
  EXPECT_EQ(t.values()[1], 4.0);
  auto x = rand_tensor({2, 3, 4}, 12, false);
  const std::size_t perm[] = {2, 0, 1};
  auto p = permute(x, perm);
  EXPECT_EQ(p.shape(), (Shape{4, 2, 3}));
  EXPECT_EQ(p.values()[(3 * 2 + 1) * 3 + 2], x.values()[(1 * 3 + 2) * 4 + 3]);
  EXPECT_THROW(reshape(x, {5, 5}), Error);
}

TEST(ForwardValues, BatchedMatmulMatchesPerBatch) {
  auto a = rand_tensor({3, 2, 4}, 13, false);
  auto b = rand_tensor({3, 4, 5}, 14, false);
  const auto y = matmul(a, b);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < 4; ++k) acc += a.values()[(n * 2 + i) * 4 + k] * b.values()[(n * 4 + k) * 5 + j];
        EXPECT_NEAR(y.values()[(n * 2 + i) * 5 + j], acc, 1e-13);
      }
}

TEST(LayerNorm, ZeroMeanUnitVariance) {
  auto x = rand_tensor({5, 16}, 15, false, -100, 100);
  const auto y = layer_norm(x, Tensor::full({16}, 1.0), Tensor::full({16}, 0.0));
  for (std::size_t r = 0; r < 5; ++r) {
    double m = 0.0, v = 0.0;
    for (std::size_t j = 0; j < 16; ++j) m += y.values()[r * 16 + j];
    m /= 16;
    for (std::size_t j = 0; j < 16; ++j) v += std::pow(y.values()[r * 16 + j] - m, 2);
    v /= 16;
    EXPECT_LE(std::abs(m), 1e-10);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
}

TEST(L2Normalize, UnitNorm) {
  auto x = rand_tensor({6, 9}, 16, false, -3, 3);
  const auto y = l2_normalize(x);
  for (std::size_t r = 0; r < 6; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < 9; ++j) s += y.values()[r * 9 + j] * y.values()[r * 9 + j];
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-9);
  }
}

TEST(Dropout, IdentityOutsideTrainingAndSeeded) {
  auto x = rand_tensor({100}, 17, false);
  std::mt19937_64 rng(1);
  const auto eval = dropout(x, 0.5, rng, false);
  EXPECT_EQ(std::vector<double>(eval.values().begin(), eval.values().end()),
            std::vector<double>(x.values().begin(), x.values().end()));
  const auto zero = dropout(x, 0.0, rng, true);
  EXPECT_EQ(zero.values()[3], x.values()[3]);
  std::mt19937_64 r1(5), r2(5);
  const auto a = dropout(x, 0.5, r1, true), b = dropout(x, 0.5, r2, true);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.values()[i], b.values()[i]);
    if (a.values()[i] == 0.0) ++dropped;
    else EXPECT_NEAR(a.values()[i], 2.0 * x.values()[i], 1e-15);
  }
  EXPECT_GT(dropped, 20u);
  EXPECT_LT(dropped, 80u);
}

TEST(CrossEntropy, InvalidTargetIsRejected) {
  auto logits = rand_tensor({2, 3}, 18, false);
  const std::size_t bad[] = {0, 3};
  EXPECT_THROW(cross_entropy(logits, bad), Error);
}

TEST(GradCheck, SumOfSquaresIsExact) {
  auto x = rand_tensor({12}, 20);
  EXPECT_LE(check([&] { return sum(mul(x, x)); }, x), 1e-9);
}

TEST(GradCheck, ConvReluMeanWithKinkNudge) {
  auto x = rand_tensor({1, 2, 6, 6}, 21);
  auto k = rand_tensor({3, 2, 3, 3}, 22);
  auto b = rand_tensor({3}, 23);
  // Push every pre-activation at least 10h away from the kink.
  const auto pre = conv2d(x.detach(), k.detach(), b.detach(), {1, 1});
  auto bv = b.mutable_values();
  for (std::size_t o = 0; o < 3; ++o) {
    double closest = 1e9;
    for (std::size_t i = 0; i < 36; ++i) closest = std::min(closest, std::abs(pre.values()[o * 36 + i]));
    if (closest < 1e-3) bv[o] += 2e-3;
  }
  auto f = [&] {
    auto y = relu(conv2d(x, k, b, {1, 1}));
    return sum(mean(reshape(y, {3 * 36}), 0));
  };
  EXPECT_LE(check(f, x), 1e-6);
  EXPECT_LE(check(f, k), 1e-6);
  EXPECT_LE(check(f, b), 1e-6);
}

// Every smooth registered op at random inputs.
TEST(GradCheck, EverySmoothOp) {
  for (const auto& [name, err] : grad_suite::smooth_op_errors()) EXPECT_LE(err, 1e-6) << name;
}

TEST(GradCheck, ReluAwayFromKinks) {
  auto x = rand_tensor({20}, 50);
  for (auto& v : x.mutable_values()) v += v >= 0 ? 1e-3 : -1e-3;
  EXPECT_LE(check([&] { return weighted(relu(x)); }, x), 1e-4);
}

TEST(Parameters, XavierBoundsAndNameSeeding) {
  ParameterStore a(7), b(7);
  const auto wa = a.xavier("layer.w", {10, 6}, 10, 6);
  const auto wb = b.xavier("layer.w", {10, 6}, 10, 6);
  const double bound = std::sqrt(6.0 / 16.0);
  for (std::size_t i = 0; i < wa.numel(); ++i) {
    EXPECT_EQ(wa.values()[i], wb.values()[i]);
    EXPECT_LE(std::abs(wa.values()[i]), bound);
  }
  const auto other = a.xavier("layer.v", {10, 6}, 10, 6);
  EXPECT_NE(other.values()[0], wa.values()[0]);
  EXPECT_EQ(a.zeros("layer.b", {6}).values()[2], 0.0);
  EXPECT_THROW(a.zeros("layer.b", {6}), Error);
  EXPECT_EQ(a.parameter_count(), 60u + 60u + 6u);
}

TEST(Parameters, CheckpointRoundTripIsBitExact) {
  ParameterStore a(3);
  a.xavier("w", {4, 5}, 4, 5);
  a.constant("t", {1}, 2.6592600369327779);
  a.set_step(42);
  const auto path = std::filesystem::temp_directory_path() / "eegclip_params.eegp";
  a.save(path);
  ParameterStore b(3);
  b.zeros("w", {4, 5});
  b.zeros("t", {1});
  b.load(path);
  EXPECT_EQ(b.snapshot(), a.snapshot());
  EXPECT_EQ(b.step(), 42u);
  EXPECT_EQ(b.serialize(), a.serialize());

  ParameterStore c(3);
  c.zeros("w", {5, 4});
  c.zeros("t", {1});
  EXPECT_THROW(c.load(path), Error);
}
