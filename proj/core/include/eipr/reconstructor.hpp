#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "eipr/sensing.hpp"
#include "eipr/types.hpp"

namespace eipr {

struct ReconstructorConfig {
  int64_t scales = 4;
  int64_t base_channels = 32;
  int64_t in_channels = 2;   // real / imaginary planes
  int64_t out_channels = 2;
  int64_t image_height = 28;
  int64_t image_width = 28;

  ImageShape image_shape() const { return {image_height, image_width}; }
  /// Smallest multiple of 2^scales that holds the image, per axis.
  ImageShape padded_shape() const;
  /// Throws std::invalid_argument on non-positive or inconsistent fields.
  void validate() const;

  bool operator==(const ReconstructorConfig&) const = default;
};

/// Two 3x3 convolutions with ReLU, the building block of every U-Net level.
class DoubleConvImpl : public torch::nn::Module {
 public:
  DoubleConvImpl(int64_t in_channels, int64_t out_channels);
  torch::Tensor forward(torch::Tensor x);

 private:
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
};
TORCH_MODULE(DoubleConv);

/// Encoder/decoder with `scales` max-pool downsamplings, transposed-conv
/// upsamplings, skip concatenations, a 1x1 output head and a residual
/// connection from input to output.
class UNetImpl : public torch::nn::Module {
 public:
  explicit UNetImpl(const ReconstructorConfig& config);
  /// [B, in_channels, H, W] -> [B, out_channels, H, W]; H and W divisible by 2^scales.
  torch::Tensor forward(torch::Tensor x);

 private:
  std::vector<DoubleConv> down_;
  std::vector<torch::nn::ConvTranspose2d> up_;
  std::vector<DoubleConv> merge_;
  torch::nn::Conv2d head_{nullptr};
  bool residual_ = false;
};
TORCH_MODULE(UNet);

/// Parameter-free embedding of measurements into image space: A^H sqrt(y).
/// Negative entries (rounding noise) are clamped to zero before the root.
torch::Tensor backproject(const torch::Tensor& y, const SensingOperator& op);
ComplexImage backproject_image(const torch::Tensor& y, const SensingOperator& op);

/// Serialized form of a trained reconstructor.
struct ModelCheckpoint {
  ReconstructorConfig config;
  std::string manifest;         // canonical TrainConfig record
  std::string manifest_digest;  // hex digest of `manifest`
  int64_t epoch = 0;
  std::vector<std::pair<std::string, torch::Tensor>> parameters;  // float32, in module order

  bool bitwise_equal(const ModelCheckpoint& other) const;
};

/// The learned map f_theta: backprojection, U-Net on 2 real planes, recombination.
///
/// Inference on a frozen model is safe from several threads; training must be
/// driven by a single owner.
class PhaseReconstructor {
 public:
  /// Fresh model; parameters initialised from `seed`.
  PhaseReconstructor(const ReconstructorConfig& config, uint64_t seed);
  explicit PhaseReconstructor(const ModelCheckpoint& checkpoint);

  const ReconstructorConfig& config() const { return config_; }
  UNet& network() { return net_; }

  /// Complex [B, H, W] images from real [B, m] (or [m]) measurements.
  torch::Tensor reconstruct(const torch::Tensor& y, const SensingOperator& op) const;
  ComplexImage reconstruct_image(const torch::Tensor& y, const SensingOperator& op) const;
  /// Map from a complex [B, H, W] backprojection to the network output, without
  /// the measurement embedding.
  torch::Tensor refine(const torch::Tensor& backprojection) const;

  std::vector<torch::Tensor> parameters() const;
  int64_t parameter_count() const;
  void to(torch::ScalarType dtype);

  ModelCheckpoint checkpoint(std::string manifest, std::string digest, int64_t epoch) const;

 private:
  void check_operator(const SensingOperator& op) const;

  ReconstructorConfig config_;
  mutable UNet net_{nullptr};
};

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

}  // namespace eipr
