#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "eipr/report.hpp"
#include "eipr/train_config.hpp"

namespace eipr {

/// Real images in [0, 1], [N, H, W], already split.
struct Corpus {
  std::string name = "corpus";
  torch::Tensor train_images;
  torch::Tensor test_images;
};

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<Regime> regimes;
  TrainConfig base;              // alpha and regime are overwritten per cell
  int64_t keep_images = 8;       // per cell, for reconstruction grids
  std::string state_dir;         // run state + checkpoints; empty keeps everything in memory
  std::function<void(const std::string&)> progress;
};

int64_t measurements_for(double alpha, int64_t n);
/// Operator seed for one sweep row; all regimes at one alpha share it.
uint64_t derive_operator_seed(uint64_t base_seed, double alpha);

/// Trains and evaluates every (alpha, regime) cell. Completed cells recorded in
/// `state_dir/sweep_state.json` are reused, so an interrupted sweep resumes where
/// it stopped. A cell that throws is recorded as a failure and the sweep continues.
EvalReport sweep_alpha(const SweepConfig& config, const Corpus& corpus);

/// Splits `images` into `train_count` / `test_count` disjoint images by a seeded permutation.
Corpus split_corpus(const torch::Tensor& images, int64_t train_count, int64_t test_count, uint64_t seed,
                    std::string name);

}  // namespace eipr
