#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "eipr/losses.hpp"
#include "eipr/sensing.hpp"
#include "eipr/types.hpp"

namespace eipr {

enum class GdInit { Backprojection, Random };

/// Fixed-step gradient descent on the amplitude (or intensity) residual.
/// Defaults were calibrated by Monte-Carlo on alpha = 4, n = 64 Gaussian problems.
struct GdConfig {
  int64_t steps = 2000;
  double step_size = 0.4;
  GdInit init = GdInit::Backprojection;
  int64_t restarts = 5;
  uint64_t seed = 0;
  McVariant objective = McVariant::Amplitude;

  void validate() const;
};

struct GdResult {
  ComplexImage image;
  double objective = 0.0;          // final value of the best restart
  double initial_objective = 0.0;  // value at that restart's starting point
  int64_t best_restart = 0;
};

/// Objective value at z (complex [H, W]) in float64.
double gd_objective(const torch::Tensor& y, const SensingOperator& op, const torch::Tensor& z,
                    McVariant objective);

/// Gradient with respect to (Re z, Im z) packed as Re + i Im, computed in closed
/// form: 2 A^H[(|Az| - sqrt(y)) Az/|Az|] for amplitude, 4 A^H[(|Az|^2 - y) Az] for intensity.
torch::Tensor gd_gradient(const torch::Tensor& y, const SensingOperator& op, const torch::Tensor& z,
                          McVariant objective);

/// One run of `steps` fixed steps from `init`; returns the final iterate.
torch::Tensor gd_descend(const torch::Tensor& y, const SensingOperator& op, torch::Tensor init, int64_t steps,
                         double step_size, McVariant objective);

/// Best of `restarts` descents; the first starts from the backprojection when
/// `init == Backprojection`, the rest from seeded complex Gaussian points scaled
/// to the measured energy.
GdResult solve(const torch::Tensor& y, const SensingOperator& op, const GdConfig& config);

/// Solves every measurement in the batch; images are returned complex [N, H, W].
torch::Tensor solve_batch(const torch::Tensor& measurements, const SensingOperator& op, const GdConfig& config);

}  // namespace eipr
