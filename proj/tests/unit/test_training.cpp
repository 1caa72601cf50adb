#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "eipr_test_support.hpp"
#include "json.hpp"

using namespace eipr;
using namespace eipr::testing;

namespace {

const ImageShape kShape{8, 8};

struct Toy {
  SensingOperator op;
  MeasurementBatch data;
};

Toy toy(int64_t count = 10, uint64_t seed = 1) {
  auto op = make_operator(48, kShape, seed);
  return {op, make_dataset(toy_images(count, 8, 8, seed + 1), op, true)};
}

TrainConfig toy_config(Regime regime, int64_t epochs = 2) {
  TrainConfig c;
  c.regime = regime;
  c.alpha = 0.75;
  c.epochs = epochs;
  c.learning_rate = 1e-3;
  c.scales = 1;
  c.base_channels = 4;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Training, SupervisedLossDecreasesOnToyProblem) {
  auto t = toy();
  std::vector<double> epoch_loss;
  TrainOptions options;
  options.on_epoch = [&](int64_t, double loss) { epoch_loss.push_back(loss); };
  train(toy_config(Regime::Supervised, 50), t.data, t.op, options);
  ASSERT_EQ(epoch_loss.size(), 50u);
  EXPECT_LT(epoch_loss.back(), epoch_loss.front() - 0.01);
}

TEST(Training, SameSeedGivesBitIdenticalCheckpoints) {
  auto t = toy();
  for (auto regime : {Regime::SsAmplitude, Regime::Supervised}) {
    auto a = train(toy_config(regime), t.data, t.op);
    auto b = train(toy_config(regime), t.data, t.op);
    EXPECT_TRUE(a.bitwise_equal(b)) << to_string(regime);
    auto other = toy_config(regime);
    other.seed = 4;
    EXPECT_FALSE(a.bitwise_equal(train(other, t.data, t.op)));
  }
}

TEST(Training, CheckpointCarriesConfigDigest) {
  auto t = toy();
  auto cfg = toy_config(Regime::SsIntensity);
  auto ckpt = train(cfg, t.data, t.op);
  EXPECT_EQ(ckpt.manifest, cfg.manifest());
  EXPECT_EQ(ckpt.manifest_digest, cfg.digest());
  EXPECT_EQ(ckpt.epoch, cfg.epochs);
  EXPECT_EQ(ckpt.config, cfg.model_config(kShape));
}

TEST(Training, SelfSupervisedRegimesNeedNoTruths) {
  auto t = toy();
  auto blind = t.data.without_truths();
  EXPECT_NO_THROW(train(toy_config(Regime::SsAmplitude), blind, t.op));
  EXPECT_NO_THROW(train(toy_config(Regime::SsIntensity), blind, t.op));
  EXPECT_THROW(train(toy_config(Regime::Supervised), blind, t.op), std::invalid_argument);
}

TEST(Training, SelfSupervisedRunIgnoresTruthValues) {
  // Scrambling the truths must not change a self-supervised run at all.
  auto t = toy();
  auto scrambled = t.data;
  scrambled.truths = complex_randn({10, 8, 8}, 99);
  auto a = train(toy_config(Regime::SsAmplitude), t.data, t.op);
  auto b = train(toy_config(Regime::SsAmplitude), scrambled, t.op);
  EXPECT_TRUE(a.bitwise_equal(b));
}

TEST(Training, WritesStepLogAndEpochCheckpoints) {
  auto t = toy();
  auto dir = scratch_dir("train_log");
  TrainOptions options;
  options.log_path = (dir / "train.log").string();
  options.checkpoint_dir = dir.string();
  auto cfg = toy_config(Regime::SsAmplitude, 3);
  auto final_ckpt = train(cfg, t.data, t.op, options);

  std::ifstream log(options.log_path);
  int64_t lines = 0;
  for (std::string line; std::getline(log, line); ++lines) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("step").get<int64_t>(), lines + 1);
    EXPECT_TRUE(j.contains("epoch") && j.contains("loss_total") && j.contains("loss_mc") && j.contains("loss_ei"));
    const double total = j.at("loss_total");
    EXPECT_NEAR(total, j.at("loss_mc").get<double>() + j.at("loss_ei").get<double>(), 1e-4 * std::abs(total) + 1e-6);
  }
  EXPECT_EQ(lines, 3 * 2);  // 10 samples in batches of 5, three epochs

  for (int e = 1; e <= 3; ++e) EXPECT_TRUE(std::filesystem::exists(dir / ("epoch_00" + std::to_string(e) + ".ckpt")));
  EXPECT_TRUE(load_checkpoint((dir / "epoch_003.ckpt").string()).bitwise_equal(final_ckpt));
}

TEST(Training, RejectsMismatchedOperator) {
  auto t = toy();
  auto other = make_operator(20, kShape, 5);
  EXPECT_THROW(train(toy_config(Regime::SsAmplitude), t.data, other), std::invalid_argument);
  MeasurementBatch empty{torch::zeros({0, 48}, torch::kDouble), std::nullopt};
  EXPECT_THROW(train(toy_config(Regime::SsAmplitude), empty, t.op), std::invalid_argument);
}

TEST(StepLog, LineIsCompactJson) {
  StepRecord r{7, 2, -0.5, 1.25, -1.75};
  EXPECT_EQ(to_log_line(r), "{\"step\":7,\"epoch\":2,\"loss_total\":-0.5,\"loss_mc\":1.25,\"loss_ei\":-1.75}");
}

TEST(Evaluate, TruthOracleScoresOne) {
  auto t = toy(12);
  LookupOracle oracle(*t.data.truths, t.op);
  EvalOptions options;
  options.batch_size = 5;
  options.keep_images = 2;
  options.regime = "oracle";
  auto result = evaluate(oracle.fn(), t.data, options);
  EXPECT_NEAR(result.stats.mean_cs, 1.0, 1e-12);
  EXPECT_NEAR(result.stats.std_cs, 0.0, 1e-12);
  EXPECT_EQ(result.stats.count, 12);
  ASSERT_EQ(result.images.size(), 2u);
  EXPECT_EQ(result.images[1].index, 1);
  EXPECT_EQ(result.images[1].regime, "oracle");
}

TEST(Evaluate, IndependentNoiseScoresNearZero) {
  // For independent complex Gaussian guesses E[CS] is about sqrt(pi / (4 n)).
  auto op = make_operator(392, ImageShape{28, 28}, 2);
  auto data = make_dataset(toy_images(40, 28, 28, 3), op, true);
  uint64_t calls = 0;
  ReconstructorFn noise = [&](const torch::Tensor& y) { return complex_randn({y.size(0), 28, 28}, 1000 + calls++); };
  auto result = evaluate(noise, data);
  EXPECT_LT(result.stats.mean_cs, 0.1);
  EXPECT_NEAR(result.stats.mean_cs, std::sqrt(M_PI / (4.0 * 784.0)), 0.02);
}

TEST(Evaluate, ZeroReconstructionRaises) {
  auto t = toy();
  ReconstructorFn zero = [](const torch::Tensor& y) { return torch::zeros({y.size(0), 8, 8}, torch::kComplexDouble); };
  EXPECT_THROW(evaluate(zero, t.data), DegenerateInputError);
  EXPECT_THROW(evaluate(zero, t.data.without_truths()), std::invalid_argument);
}

TEST(Evaluate, CheckpointPathIsRepeatableAndChecksShape) {
  auto t = toy();
  auto ckpt = train(toy_config(Regime::Supervised), t.data, t.op);
  auto a = evaluate(ckpt, t.data, t.op);
  auto b = evaluate(ckpt, t.data, t.op);
  EXPECT_EQ(a.stats, b.stats);
  EXPECT_GT(a.stats.mean_cs, 0.0);
  EXPECT_LE(a.stats.mean_cs, 1.0);
  auto wrong = make_operator(48, ImageShape{6, 8}, 1);
  EXPECT_THROW(evaluate(ckpt, make_dataset(toy_images(2, 6, 8, 1), wrong, true), wrong), std::invalid_argument);
}
