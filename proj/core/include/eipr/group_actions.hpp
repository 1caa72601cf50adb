#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "eipr/types.hpp"

namespace eipr {

/// Cyclic 2D translation on a fixed image grid. Offsets are stored reduced
/// modulo the grid so that equal group elements compare equal.
class ShiftTransform {
 public:
  ShiftTransform() = default;
  ShiftTransform(int64_t dr, int64_t dc, ImageShape shape);

  int64_t dr() const { return dr_; }
  int64_t dc() const { return dc_; }
  ImageShape shape() const { return shape_; }
  bool is_identity() const { return dr_ == 0 && dc_ == 0; }

  /// this ∘ other: apply `other` first, then this.
  ShiftTransform compose(const ShiftTransform& other) const;

  bool operator==(const ShiftTransform&) const = default;

 private:
  int64_t dr_ = 0;
  int64_t dc_ = 0;
  ImageShape shape_;
};

/// out(r, c) = x((r - dr) mod H, (c - dc) mod W) on the trailing two dims.
torch::Tensor apply(const ShiftTransform& g, const torch::Tensor& x);
ComplexImage apply(const ShiftTransform& g, const ComplexImage& x);

ShiftTransform inverse(const ShiftTransform& g);

/// `count` distinct non-identity shifts, uniform without replacement.
/// Throws std::invalid_argument when count < 1 or count > H*W - 1.
std::vector<ShiftTransform> sample_shifts(int64_t count, ImageShape shape, Rng& rng);

/// Applies shifts[i] to images[i / per_image] and stacks the results: input [B, H, W],
/// shifts of length B * per_image, output [B * per_image, H, W].
torch::Tensor apply_per_image(const std::vector<ShiftTransform>& shifts, const torch::Tensor& images,
                              int64_t per_image);

}  // namespace eipr
