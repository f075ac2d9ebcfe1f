#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "secgate/core/error.hpp"
#include "secgate/vet/trainer.hpp"

using namespace secgate;
using namespace secgate::vet;

namespace {

std::vector<TokenId> repetitive_stream(std::size_t n, std::size_t vocab) {
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<TokenId>((i * 7) % 11 % vocab));
  return out;
}

TrainConfig small_config(std::size_t steps) {
  TrainConfig cfg;
  cfg.steps = steps;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 2;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(Trainer, ZeroStepsLeavesModelUnchanged) {
  auto model = VetModel::init({20, 8, 1, 8}, 1);
  const auto before = model;
  const auto stream = repetitive_stream(100, 20);
  const auto report = train(model, stream, stream, small_config(0));
  EXPECT_EQ(model, before);
  EXPECT_EQ(report.initial_heldout_nll, report.final_heldout_nll);
  EXPECT_TRUE(report.loss_curve.empty());
}

TEST(Trainer, BodyUntouchedAndLossFalls) {
  auto model = VetModel::init({20, 16, 1, 8}, 1);
  const auto body = model.body().params;
  const auto stream = repetitive_stream(400, 20);
  const auto report = train(model, stream, stream, small_config(150));
  EXPECT_EQ(model.body().params, body);
  EXPECT_EQ(report.frozen_checksum_before, report.frozen_checksum_after);
  EXPECT_EQ(report.loss_curve.size(), 150u);
  for (double l : report.loss_curve) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(report.final_heldout_nll, 0.8 * report.initial_heldout_nll);
}

TEST(Trainer, SeededDeterminism) {
  const auto stream = repetitive_stream(300, 20);
  auto a = VetModel::init({20, 8, 1, 8}, 1);
  auto b = VetModel::init({20, 8, 1, 8}, 1);
  const auto ra = train(a, stream, stream, small_config(20));
  const auto rb = train(b, stream, stream, small_config(20));
  EXPECT_EQ(a, b);
  EXPECT_EQ(ra.loss_curve, rb.loss_curve);
}

TEST(Trainer, SgdAlsoWorks) {
  auto model = VetModel::init({20, 8, 1, 8}, 1);
  auto cfg = small_config(30);
  cfg.optimizer.kind = OptimizerConfig::Kind::Sgd;
  cfg.learning_rate = 0.5;
  const auto stream = repetitive_stream(200, 20);
  const auto report = train(model, stream, stream, cfg);
  EXPECT_LT(report.final_heldout_nll, report.initial_heldout_nll);
}

TEST(Trainer, Preconditions) {
  auto model = VetModel::init({20, 8, 1, 8}, 1);
  const auto shortstream = repetitive_stream(8, 20);
  const auto stream = repetitive_stream(100, 20);
  EXPECT_THROW(train(model, shortstream, stream, small_config(1)), Error);
  EXPECT_THROW(train(model, stream, shortstream, small_config(1)), Error);
  auto bad = small_config(1);
  bad.learning_rate = 0;
  EXPECT_THROW(train(model, stream, stream, bad), Error);
}

TEST(Trainer, DivergenceReportsStep) {
  auto model = VetModel::init({20, 8, 1, 8}, 1);
  auto cfg = small_config(50);
  cfg.optimizer.kind = OptimizerConfig::Kind::Sgd;
  cfg.learning_rate = 1e300;
  const auto stream = repetitive_stream(100, 20);
  try {
    train(model, stream, stream, cfg);
    FAIL();
  } catch (const NonFiniteLossError& e) {
    EXPECT_LT(e.step(), 50u);
  }
}

TEST(Trainer, ReportJson) {
  auto model = VetModel::init({20, 8, 1, 8}, 1);
  const auto stream = repetitive_stream(100, 20);
  const auto j = to_json(train(model, stream, stream, small_config(3)));
  EXPECT_EQ(j["loss_curve"].size(), 3u);
  EXPECT_TRUE(j.contains("initial_heldout_nll"));
  EXPECT_EQ(j["frozen_checksum_before"], j["frozen_checksum_after"]);
}

TEST(Trainer, HeldoutNllOfUniformStream) {
  const auto model = VetModel::init({300, 64, 2, 64}, 1);
  std::mt19937_64 rng(99);
  std::vector<TokenId> stream(2000);
  for (auto& t : stream) t = static_cast<TokenId>(rng() % 300);
  EXPECT_NEAR(heldout_nll(model, stream), std::log(300.0), 0.1);
}
