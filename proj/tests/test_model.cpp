#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "secgate/core/error.hpp"
#include "secgate/vet/model.hpp"
#include "support.hpp"

using namespace secgate;
using namespace secgate::vet;

namespace {

std::vector<std::vector<TokenId>> random_batch(std::size_t rows, std::size_t len, std::size_t vocab,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<TokenId>> out(rows);
  for (auto& r : out) {
    for (std::size_t i = 0; i < len; ++i) r.push_back(static_cast<TokenId>(rng() % vocab));
  }
  return out;
}

}  // namespace

TEST(Model, GradientsMatchCentralDifferences) {
  const auto model = VetModel::init({20, 8, 1, 8}, 3);
  const auto batch = random_batch(2, 9, 20, 4);
  const auto check = oracle::finite_difference_check(model, batch);
  EXPECT_EQ(check.coordinates, 2u * 20 * 8);
  EXPECT_LE(check.max_rel_error, 1e-3) << check.worst_tensor << "[" << check.worst_index << "]";
}

TEST(Model, DuplicatedSequenceGivesSameGradient) {
  const auto model = VetModel::init({20, 8, 1, 8}, 9);
  const auto one = random_batch(1, 9, 20, 10);
  auto two = one;
  two.push_back(one[0]);
  Gradients g1, g2;
  const double l1 = model.loss_and_grads(one, g1);
  const double l2 = model.loss_and_grads(two, g2);
  EXPECT_NEAR(l1, l2, 1e-12);
  for (std::size_t i = 0; i < g1.embed.size(); ++i) EXPECT_NEAR(g1.embed[i], g2.embed[i], 1e-12);
  for (std::size_t i = 0; i < g1.project.size(); ++i) {
    EXPECT_NEAR(g1.project[i], g2.project[i], 1e-12);
  }
}

TEST(Model, GradientsCoverOnlyTrainableTensors) {
  EXPECT_EQ(Gradients::names(), (std::vector<std::string>{"embed", "project"}));
  const auto model = VetModel::init({20, 8, 1, 8}, 1);
  Gradients g;
  model.loss_and_grads(random_batch(1, 5, 20, 2), g);
  EXPECT_EQ(g.embed.size(), 20u * 8);
  EXPECT_EQ(g.project.size(), 8u * 20);
}

TEST(Model, DistributionSumsToOne) {
  const auto model = VetModel::init({50, 16, 2, 12}, 7);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 30; ++t) {
    std::vector<TokenId> ctx(1 + rng() % 12);
    for (auto& c : ctx) c = static_cast<TokenId>(rng() % 50);
    const auto p = model.next_token_distribution(ctx);
    ASSERT_EQ(p.size(), 50u);
    double sum = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Model, UntrainedIsNearUniform) {
  const auto model = VetModel::init({300, 64, 2, 64}, 1);
  const auto batch = random_batch(4, 65, 300, 12);
  EXPECT_NEAR(model.loss(batch), std::log(300.0), 0.1);
}

TEST(Model, ParameterAccounting) {
  const ModelDims dims{300, 64, 2, 64};
  const auto model = VetModel::init(dims, 1);
  std::size_t total = 0, trainable = 0;
  for (const auto& p : model.parameters()) {
    total += p.count;
    if (p.trainable) trainable += p.count;
  }
  // embed and project are the only trainable tensors
  EXPECT_EQ(trainable, model.embed().size() + model.project().size());
  EXPECT_EQ(trainable, 2u * 300 * 64);
  EXPECT_EQ(total, model.embed().size() + model.project().size() + model.body().params.size());
  EXPECT_EQ(model.total_parameters(), total);
  EXPECT_EQ(model.trainable_parameters(), trainable);
  EXPECT_DOUBLE_EQ(trainable_fraction(300, 64, static_cast<double>(total)),
                   static_cast<double>(trainable) / static_cast<double>(total));
}

TEST(Model, TrainableFraction) {
  EXPECT_NEAR(trainable_fraction(49000, 8192, 7.0e10) * 100, 1.15, 0.01);
  EXPECT_DOUBLE_EQ(trainable_fraction(1, 1, 2), 1.0);
  EXPECT_THROW(trainable_fraction(0, 1, 2), Error);
  EXPECT_THROW(trainable_fraction(1, 1, -2), Error);
}

TEST(Model, ResizeIdentity) {
  const auto model = VetModel::init({30, 8, 1, 8}, 2);
  EXPECT_EQ(model.resized(30, 5), model);
}

TEST(Model, ResizeGrowsRows) {
  const auto model = VetModel::init({300, 64, 2, 64}, 2);
  const auto big = model.resized(305, 17);
  const std::size_t d = 64;
  ASSERT_EQ(big.dims().vocab, 305u);
  EXPECT_EQ(big.body().digest(), model.body().digest());
  for (std::size_t i = 0; i < 300 * d; ++i) {
    ASSERT_EQ(std::memcmp(&big.embed()[i], &model.embed()[i], sizeof(float)), 0);
  }
  // projection is d x V row-major: old columns kept, new ones zero
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < 305; ++c) {
      const float v = big.project()[r * 305 + c];
      if (c < 300) {
        ASSERT_EQ(v, model.project()[r * 300 + c]);
      } else {
        ASSERT_EQ(v, 0.0f);
      }
    }
  }
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < 300; ++r) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += model.embed()[r * d + i];
  }
  for (auto& m : mean) m /= 300;
  for (std::size_t r = 300; r < 305; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      EXPECT_LE(std::abs(big.embed()[r * d + i] - mean[i]), 5 * 0.01);
    }
  }
  try {
    model.resized(299, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShrinkNotSupported);
  }
}

TEST(Model, SaveLoadAndCorruption) {
  testsupport::TempDir dir;
  const auto path = (dir / "m.bin").string();
  const auto model = VetModel::init({40, 8, 1, 8}, 6);
  model.save(path);
  EXPECT_EQ(VetModel::load(path), model);

  auto bytes = testsupport::read_file(path);
  bytes[100] ^= 0x01;
  testsupport::write_file(path, bytes);
  EXPECT_THROW(VetModel::load(path), CorruptError);

  testsupport::write_file(path, bytes.substr(0, 64));
  try {
    VetModel::load(path);
    FAIL();
  } catch (const CorruptError& e) {
    EXPECT_EQ(e.offset(), 64u);
  }
  EXPECT_THROW(VetModel::load((dir / "none.bin").string()), Error);
}

TEST(Model, BatchValidation) {
  const auto model = VetModel::init({20, 8, 1, 8}, 1);
  EXPECT_THROW(model.loss({{1}}), Error);
  EXPECT_THROW(model.loss({{1, 25}}), Error);
  EXPECT_THROW(model.loss({std::vector<TokenId>(10, 1)}), Error);
}

TEST(Model, Deterministic) {
  EXPECT_EQ(VetModel::init({30, 8, 1, 8}, 4), VetModel::init({30, 8, 1, 8}, 4));
  EXPECT_FALSE(VetModel::init({30, 8, 1, 8}, 4) == VetModel::init({30, 8, 1, 8}, 5));
}
