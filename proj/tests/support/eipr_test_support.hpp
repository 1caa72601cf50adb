#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "eipr/eipr.hpp"

namespace eipr::testing {

/// r e^{i phi} as a scalar that multiplies complex tensors.
inline c10::complex<double> polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }

inline torch::Generator generator(uint64_t seed) { return at::make_generator<at::CPUGeneratorImpl>(seed); }

/// Complex Gaussian tensor in float64.
inline torch::Tensor complex_randn(torch::IntArrayRef sizes, uint64_t seed) {
  std::vector<int64_t> dims(sizes.begin(), sizes.end());
  dims.push_back(2);
  return torch::view_as_complex(torch::randn(dims, generator(seed), torch::kDouble)).clone();
}

/// Unit-modulus image with phases uniform in [0, 2pi).
inline torch::Tensor unit_modulus(torch::IntArrayRef sizes, uint64_t seed) {
  auto theta = torch::rand(sizes, generator(seed), torch::kDouble) * (2.0 * M_PI);
  return torch::polar(torch::ones_like(theta), theta);
}

inline double relative_error(const torch::Tensor& a, const torch::Tensor& b) {
  auto diff = torch::linalg_vector_norm(a - b).item<double>();
  auto scale = std::max(torch::linalg_vector_norm(b).item<double>(), 1e-300);
  return diff / scale;
}

/// Central differences of a scalar function of a real float64 tensor.
inline torch::Tensor finite_difference(const std::function<double(const torch::Tensor&)>& fn, const torch::Tensor& at,
                                       double h = 1e-6) {
  auto point = at.detach().clone();
  auto flat = point.view({-1});
  auto grad = torch::zeros_like(flat);
  auto acc = flat.accessor<double, 1>();
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = acc[i];
    acc[i] = orig + h;
    const double plus = fn(point);
    acc[i] = orig - h;
    const double minus = fn(point);
    acc[i] = orig;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad.view(at.sizes());
}

/// Autograd gradient of the same scalar function.
inline torch::Tensor autograd_gradient(const std::function<torch::Tensor(const torch::Tensor&)>& fn,
                                       const torch::Tensor& at) {
  auto p = at.detach().clone().requires_grad_(true);
  auto value = fn(p);
  value.backward();
  return p.grad().detach();
}

/// Linear reconstructor f(y) = W y with W = (theta[0] + i theta[1]) of shape [n, m].
inline ReconstructorFn linear_reconstructor(const torch::Tensor& theta, ImageShape shape) {
  return [theta, shape](const torch::Tensor& y) {
    auto w = torch::complex(theta[0], theta[1]);
    auto x = torch::matmul(y.to(torch::kComplexDouble), w.transpose(0, 1));
    return x.reshape({y.size(0), shape.height, shape.width});
  };
}

/// Exact inverse on a closed set of images: returns the stored image whose
/// measurements equal the input. Every shift of every image is stored, so the
/// map is exactly equivariant on that set.
class LookupOracle {
 public:
  LookupOracle(const torch::Tensor& images, const SensingOperator& op) : op_(op) {
    const auto h = images.size(1);
    const auto w = images.size(2);
    std::vector<torch::Tensor> all;
    for (int64_t i = 0; i < images.size(0); ++i)
      for (int64_t dr = 0; dr < h; ++dr)
        for (int64_t dc = 0; dc < w; ++dc) all.push_back(torch::roll(images[i], {dr, dc}, {0, 1}));
    library_ = torch::stack(all);
    measurements_ = op.forward(library_);
  }

  torch::Tensor operator()(const torch::Tensor& y) const {
    auto d = torch::cdist(y.to(torch::kDouble), measurements_);
    auto index = d.argmin(1);
    return library_.index_select(0, index);
  }

  ReconstructorFn fn() const {
    return [this](const torch::Tensor& y) { return (*this)(y); };
  }

 private:
  SensingOperator op_;
  torch::Tensor library_;
  torch::Tensor measurements_;
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eipr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Smooth real images in [0, 1] shaped [N, H, W].
inline torch::Tensor toy_images(int64_t count, int64_t h, int64_t w, uint64_t seed) {
  auto base = torch::rand({count, 1, (h + 3) / 4, (w + 3) / 4}, generator(seed), torch::kDouble);
  auto up = torch::nn::functional::interpolate(
      base, torch::nn::functional::InterpolateFuncOptions().size(std::vector<int64_t>{h, w}).mode(torch::kBilinear).align_corners(false));
  return up.squeeze(1).clamp(0.0, 1.0).contiguous();
}

}  // namespace eipr::testing
