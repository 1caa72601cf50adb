#pragma once

#include <functional>
#include <map>
#include <string>

#include <torch/torch.h>

#include "eipr/sensing.hpp"
#include "eipr/types.hpp"

namespace eipr {

/// A reconstruction map f: real measurements [B, m] -> complex images [B, H, W].
using ReconstructorFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// How per-sample terms are combined. Mean keeps the weight between terms
/// independent of batch size; Sum matches the plain summed objectives.
enum class Reduction { Mean, Sum };

enum class McVariant { Intensity, Amplitude };

/// How the consistency term is scaled inside loss_total: the per-sample sum over
/// the m measurements, or that sum divided by m.
enum class McNormalization { Sum, PerMeasurement };

struct LossValue {
  torch::Tensor total;                       // scalar, carries the autograd graph
  std::map<std::string, double> components;  // "mc", "ei" (or "sup")
  int64_t degenerate = 0;                    // CS terms that hit the zero-norm guard

  double value() const { return total.item<double>(); }
};

/// sum_j (y_j - |A f(y)|_j^2)^2 per sample, reduced over the batch.
LossValue loss_mc_intensity(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                            Reduction reduction = Reduction::Mean);

/// sum_j (sqrt(y_j) - |A f(y)|_j)^2 per sample. Throws std::invalid_argument on negative y.
LossValue loss_mc_amplitude(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                            Reduction reduction = Reduction::Mean);

/// Equivariance term: for each sample and each of `shifts_per_image` random
/// translations g, -CS(T_g f(y), f(h(T_g f(y)))). Both appearances of f carry
/// gradients. Shifts are drawn from `rng` image by image, in batch order.
LossValue loss_ei(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                  int64_t shifts_per_image, Rng& rng, Reduction reduction = Reduction::Mean);

struct TotalLossOptions {
  double lambda = 1.0;
  McVariant mc_variant = McVariant::Amplitude;
  int64_t shifts_per_image = 2;
  Reduction reduction = Reduction::Mean;
  McNormalization mc_normalization = McNormalization::Sum;
};

/// mc + lambda * ei, with mc divided by m under McNormalization::PerMeasurement. With lambda == 0 the equivariance term is skipped entirely
/// (no shifts are drawn) and total is exactly mc.
LossValue loss_total(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                     const TotalLossOptions& options, Rng& rng);

/// -CS(x_i, f(y_i)) reduced over the batch. Throws std::invalid_argument without truths.
LossValue loss_supervised(const MeasurementBatch& batch, const ReconstructorFn& f,
                          Reduction reduction = Reduction::Mean);

}  // namespace eipr
