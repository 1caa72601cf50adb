#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "eipr_test_support.hpp"

using namespace eipr;
using namespace eipr::testing;

namespace {

Corpus toy_corpus() {
  auto images = toy_images(14, 8, 8, 21);
  return split_corpus(images, 10, 4, 1, "toy");
}

SweepConfig toy_sweep(const std::string& state_dir) {
  SweepConfig s;
  s.alphas = {0.5, 1.0};
  s.regimes = {Regime::Supervised, Regime::SsAmplitude};
  s.base.epochs = 1;
  s.base.learning_rate = 1e-3;
  s.base.dataset_fraction = 1.0;
  s.base.scales = 1;
  s.base.base_channels = 2;
  s.base.seed = 5;
  s.keep_images = 2;
  s.state_dir = state_dir;
  return s;
}

void expect_same_report(const EvalReport& a, const EvalReport& b) {
  ASSERT_EQ(a.per_alpha, b.per_alpha);
  ASSERT_EQ(a.per_image.size(), b.per_image.size());
  for (size_t i = 0; i < a.per_image.size(); ++i) {
    EXPECT_EQ(a.per_image[i].regime, b.per_image[i].regime);
    EXPECT_EQ(a.per_image[i].cs, b.per_image[i].cs);
    EXPECT_TRUE(torch::equal(a.per_image[i].aligned, b.per_image[i].aligned));
  }
}

}  // namespace

TEST(Sweep, MeasurementCountRoundsAndStaysPositive) {
  EXPECT_EQ(measurements_for(0.5, 784), 392);
  EXPECT_EQ(measurements_for(0.2, 784), 157);
  EXPECT_EQ(measurements_for(1e-6, 784), 1);
  EXPECT_THROW(measurements_for(0.0, 784), std::invalid_argument);
  EXPECT_EQ(derive_operator_seed(3, 0.5), derive_operator_seed(3, 0.5));
  EXPECT_NE(derive_operator_seed(3, 0.5), derive_operator_seed(3, 0.8));
}

TEST(Sweep, SplitIsDisjointAndSeeded) {
  auto images = torch::arange(20, torch::kDouble).view({20, 1, 1}).expand({20, 2, 2}).contiguous();
  auto c = split_corpus(images, 12, 6, 4, "ids");
  std::set<double> train_ids;
  for (int64_t i = 0; i < 12; ++i) train_ids.insert(c.train_images[i][0][0].item<double>());
  EXPECT_EQ(train_ids.size(), 12u);
  for (int64_t i = 0; i < 6; ++i) EXPECT_FALSE(train_ids.count(c.test_images[i][0][0].item<double>()));
  EXPECT_TRUE(torch::equal(split_corpus(images, 12, 6, 4, "ids").train_images, c.train_images));
  EXPECT_FALSE(torch::equal(split_corpus(images, 12, 6, 5, "ids").train_images, c.train_images));
  EXPECT_THROW(split_corpus(images, 15, 6, 4, "ids"), std::invalid_argument);
}

TEST(Sweep, FillsEveryCellAndIsRepeatable) {
  auto corpus = toy_corpus();
  auto a = sweep_alpha(toy_sweep(""), corpus);
  EXPECT_TRUE(a.failures.empty());
  EXPECT_EQ(a.cell_count(), 4);
  ASSERT_NE(a.find(1.0, "ss_amplitude"), nullptr);
  EXPECT_EQ(a.find(1.0, "ss_amplitude")->count, 4);
  EXPECT_EQ(a.per_image.size(), 8u);
  expect_same_report(a, sweep_alpha(toy_sweep(""), corpus));
}

TEST(Sweep, ResumesFromStateWithoutRetraining) {
  auto corpus = toy_corpus();
  auto dir = scratch_dir("sweep_resume");
  auto first = sweep_alpha(toy_sweep(dir.string()), corpus);
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep_state.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cells" / "a500000_supervised" / "model.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cells" / "a500000_supervised" / "train.log"));

  auto cfg = toy_sweep(dir.string());
  int trained = 0;
  cfg.progress = [&](const std::string& msg) { trained += msg.rfind("train ", 0) == 0; };
  auto second = sweep_alpha(cfg, corpus);
  EXPECT_EQ(trained, 0);
  expect_same_report(first, second);
}

TEST(Sweep, FailedCellIsRecordedAndRetriedOnResume) {
  auto corpus = toy_corpus();
  auto dir = scratch_dir("sweep_failure");
  auto cfg = toy_sweep(dir.string());
  cfg.progress = [](const std::string& msg) {
    if (msg.rfind("train a1000000_ss_amplitude", 0) == 0) throw std::runtime_error("injected fault");
  };
  auto broken = sweep_alpha(cfg, corpus);
  ASSERT_EQ(broken.failures.size(), 1u);
  EXPECT_EQ(broken.failures[0].regime, "ss_amplitude");
  EXPECT_EQ(broken.failures[0].alpha, 1.0);
  EXPECT_NE(broken.failures[0].message.find("injected fault"), std::string::npos);
  EXPECT_EQ(broken.cell_count(), 3);

  cfg.progress = nullptr;
  auto healed = sweep_alpha(cfg, corpus);
  EXPECT_TRUE(healed.failures.empty());
  EXPECT_EQ(healed.cell_count(), 4);
  expect_same_report(healed, sweep_alpha(toy_sweep(""), corpus));
}

TEST(Sweep, RefusesStateFromDifferentConfiguration) {
  auto corpus = toy_corpus();
  auto dir = scratch_dir("sweep_digest");
  auto cfg = toy_sweep(dir.string());
  cfg.alphas = {1.0};
  cfg.regimes = {Regime::Supervised};
  sweep_alpha(cfg, corpus);
  cfg.base.learning_rate = 2e-3;
  EXPECT_THROW(sweep_alpha(cfg, corpus), std::invalid_argument);
}

TEST(Sweep, RejectsEmptyGrid) {
  auto cfg = toy_sweep("");
  cfg.alphas.clear();
  EXPECT_THROW(sweep_alpha(cfg, toy_corpus()), std::invalid_argument);
}
