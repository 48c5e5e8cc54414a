#include <gtest/gtest.h>

#include <cmath>

#include "eegclip/autodiff/ops.hpp"
#include "eegclip/error.hpp"
#include "eegclip/matching/matching.hpp"
#include "eegclip/text/text_bank.hpp"
#include "oracles.hpp"

using namespace eegclip;
using ad::Tensor;

namespace {

text::TextBank axis_bank() {
  return text::TextBank({"negative", "neutral", "positive"}, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, text::BankSource::kStub,
                        "axes");
}

}  // namespace

TEST(Similarity, CosineOverTemperature) {
  const auto bank = axis_bank();
  const auto e = Tensor::from_values({1, 3}, {1, 0, 0});
  const auto l1 = match::similarity_logits(e, bank, 1.0);
  EXPECT_DOUBLE_EQ(l1.values()[0], 1.0);
  EXPECT_DOUBLE_EQ(l1.values()[1], 0.0);
  const auto l2 = match::similarity_logits(e, bank, 0.07);
  EXPECT_NEAR(l2.values()[0], 14.2857, 1e-4);
  EXPECT_THROW(match::similarity_logits(e, bank, 0.0), Error);
  EXPECT_THROW(match::similarity_logits(e, bank, -1.0), Error);
  EXPECT_THROW(match::similarity_logits(Tensor::from_values({1, 2}, {1, 0}), bank, 1.0), Error);

  const auto ls = Tensor::scalar(std::log(1.0 / 0.07));
  const auto l3 = match::similarity_logits(e, bank, ls);
  EXPECT_NEAR(l3.values()[0], l2.values()[0], 1e-12);
}

TEST(Predict, ArgmaxWithFirstIndexTies) {
  const std::vector<std::string> labels = {"neg", "neu", "pos"};
  const auto logits = Tensor::from_values({3, 3}, {0.1, 0.9, 0.2, 0.5, 0.5, 0.1, 0.0, 0.0, 0.0});
  const auto names = match::predict(logits, labels);
  EXPECT_EQ(names, (std::vector<std::string>{"neu", "neg", "neg"}));
  EXPECT_THROW(match::predict(logits, std::vector<std::string>{"a", "b"}), Error);
}

TEST(Predict, InvariantToPositiveScaleAndShift) {
  const auto v = oracle::random_values(20 * 3, 4);
  const auto a = Tensor::from_values({20, 3}, v);
  std::vector<double> w(v);
  for (auto& x : w) x = 3.0 * x + 7.0;
  EXPECT_EQ(match::predict_indices(a), match::predict_indices(Tensor::from_values({20, 3}, w)));
}

TEST(Loss, UniformLogitsGiveLogK) {
  const std::vector<std::size_t> t = {0, 2};
  EXPECT_NEAR(match::matching_loss(Tensor::zeros({2, 3}), t).item(), std::log(3.0), 1e-12);
  const auto confident = Tensor::from_values({2, 3}, {20, 0, 0, 0, 0, 20});
  EXPECT_LE(match::matching_loss(confident, t).item(), 1e-8);
}

TEST(Loss, MatchesLogSumExpOracle) {
  const auto v = oracle::random_values(6 * 4, 11, -30, 30);
  const std::vector<std::size_t> t = {0, 3, 2, 1, 1, 0};
  EXPECT_NEAR(match::matching_loss(Tensor::from_values({6, 4}, v), t).item(), oracle::cross_entropy(v, 4, t), 1e-12);
}

TEST(Loss, DescentStepLowersLossAndBankStaysFrozen) {
  const auto bank = text::build_bank_stub({"a", "b", "c"}, text::PromptTemplateSet::builtin(), 16);
  auto eeg = Tensor::from_values({4, 16}, oracle::random_values(64, 12), true);
  const std::vector<std::size_t> t = {0, 1, 2, 0};
  auto loss_of = [&](const Tensor& e) { return match::matching_loss(match::similarity_logits(e, bank, 0.5), t); };
  const auto loss = loss_of(eeg);
  ad::backward(loss);
  std::vector<double> stepped(eeg.values().begin(), eeg.values().end());
  for (std::size_t i = 0; i < stepped.size(); ++i) stepped[i] -= 0.01 * eeg.grad()[i];
  EXPECT_LT(loss_of(Tensor::from_values({4, 16}, stepped)).item(), loss.item());
  EXPECT_FALSE(bank.matrix().has_grad());
}
