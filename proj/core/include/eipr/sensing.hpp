#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <torch/torch.h>

#include "eipr/types.hpp"

namespace eipr {

/// Dense complex Gaussian matrix A (m x n) acting on images of a fixed shape.
///
/// Entries have independent real and imaginary parts drawn from N(0, 1/(2m)),
/// so E|a_j^T x|^2 = |x|^2 / m and the total measured energy matches |x|^2 on
/// average. The matrix comes from a CPU generator seeded with `seed` and is
/// bit-reproducible on a given platform.
class SensingOperator {
 public:
  SensingOperator() = default;

  /// Wraps an existing complex m x n matrix (e.g. loaded from a dataset archive).
  SensingOperator(torch::Tensor matrix, ImageShape shape, uint64_t seed);

  int64_t m() const { return m_; }
  int64_t n() const { return shape_.numel(); }
  double alpha() const { return static_cast<double>(m_) / static_cast<double>(n()); }
  uint64_t seed() const { return seed_; }
  ImageShape shape() const { return shape_; }

  /// The complex128 matrix.
  const torch::Tensor& matrix() const { return matrix_; }
  /// The matrix in the complex dtype matching `real_dtype` (float or double).
  const torch::Tensor& matrix_for(torch::ScalarType real_dtype) const;

  /// y = |A x|^2 row-wise. `x` is complex [B, H, W] or [H, W]; returns real [B, m] or [m]
  /// in the matching real precision. Differentiable in x.
  torch::Tensor forward(const torch::Tensor& x) const;

  /// A x without the modulus; complex [B, m] or [m].
  torch::Tensor apply_linear(const torch::Tensor& x) const;

  /// A^H v reshaped to the image shape. `v` is [B, m] or [m], real or complex.
  torch::Tensor adjoint(const torch::Tensor& v) const;

 private:
  torch::Tensor matrix_;
  torch::Tensor matrix_f32_;
  int64_t m_ = 0;
  ImageShape shape_;
  uint64_t seed_ = 0;
};

/// Draws A with a_kl ~ N(0, 1/2m) + i N(0, 1/2m). Throws std::invalid_argument for
/// non-positive dimensions.
SensingOperator make_operator(int64_t m, ImageShape shape, uint64_t seed);
/// Square image layout when n is a perfect square, otherwise a 1 x n strip.
SensingOperator make_operator(int64_t m, int64_t n, uint64_t seed);

torch::Tensor forward(const SensingOperator& op, const ComplexImage& x);
ComplexImage adjoint(const SensingOperator& op, const torch::Tensor& v);

/// x = exp(i x0) elementwise. Accepts any real tensor; output is complex of matching precision.
torch::Tensor synthesize_phase(const torch::Tensor& x0);
/// Single-image form: `x0` must be a finite real [H, W] tensor.
ComplexImage synthesize_phase_image(const torch::Tensor& x0);

/// Measurements paired (optionally) with ground-truth signals.
struct MeasurementBatch {
  torch::Tensor measurements;           // real [N, m], entries >= 0
  std::optional<torch::Tensor> truths;  // complex [N, H, W]

  int64_t size() const { return measurements.defined() ? measurements.size(0) : 0; }
  bool has_truths() const { return truths.has_value(); }
  /// Same measurements with truths dropped.
  MeasurementBatch without_truths() const;
  /// Rows selected by `index` (int64 tensor).
  MeasurementBatch select(const torch::Tensor& index) const;
  /// Casts measurements to `real_dtype` and truths to its complex counterpart.
  MeasurementBatch to(torch::ScalarType real_dtype) const;
};

/// Encodes every image (real [N, H, W], values in [0, 1]) as exp(i x0) and measures it
/// with `op` in float64. Throws std::invalid_argument on an empty corpus.
MeasurementBatch make_dataset(const torch::Tensor& images, const SensingOperator& op, bool keep_truth);

/// Seeded subset of `count` indices of size round(fraction * count), sorted ascending.
std::vector<int64_t> select_fraction(int64_t count, double fraction, uint64_t seed);

}  // namespace eipr
