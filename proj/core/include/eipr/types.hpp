#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <torch/torch.h>

namespace eipr {

/// Caller-owned random state for every stochastic choice outside libtorch.
using Rng = std::mt19937_64;

struct ImageShape {
  int64_t height = 0;
  int64_t width = 0;

  int64_t numel() const { return height * width; }
  bool operator==(const ImageShape&) const = default;
  std::string str() const;
};

/// A single complex signal with its 2D layout.
///
/// `values` is a complex tensor of shape [height, width]. Batched code passes
/// [B, height, width] tensors directly; this wrapper is the per-image contract.
class ComplexImage {
 public:
  ComplexImage() = default;
  /// Accepts [H, W] or flat [H*W] complex input; validates finiteness.
  ComplexImage(torch::Tensor values, ImageShape shape);

  static ComplexImage zeros(ImageShape shape, torch::ScalarType dtype = torch::kComplexDouble);

  const torch::Tensor& values() const { return values_; }
  ImageShape shape() const { return shape_; }
  int64_t height() const { return shape_.height; }
  int64_t width() const { return shape_.width; }
  int64_t size() const { return shape_.numel(); }
  torch::Tensor flat() const { return values_.reshape({shape_.numel()}); }

 private:
  torch::Tensor values_;
  ImageShape shape_;
};

/// Throws ShapeError unless the trailing two dims of `t` equal `shape`.
void check_image_dims(const torch::Tensor& t, ImageShape shape, const char* what);

/// SplitMix64 combination of two seeds; used to derive independent sub-seeds.
uint64_t mix_seed(uint64_t a, uint64_t b);

/// Complex dtype matching a real one (float -> cfloat, double -> cdouble).
torch::ScalarType complex_counterpart(torch::ScalarType real);
/// Real dtype matching a complex one.
torch::ScalarType real_counterpart(torch::ScalarType complex);

}  // namespace eipr
