#include "eipr/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <ATen/CPUGeneratorImpl.h>

#include "eipr/errors.hpp"

namespace eipr {

SensingOperator::SensingOperator(torch::Tensor matrix, ImageShape shape, uint64_t seed)
    : shape_(shape), seed_(seed) {
  if (shape.height <= 0 || shape.width <= 0) throw std::invalid_argument("operator image shape must be positive");
  if (matrix.dim() != 2 || matrix.size(1) != shape.numel())
    throw ShapeError("operator matrix must be m x " + std::to_string(shape.numel()) + ", got " +
                     c10::str(matrix.sizes()));
  if (matrix.size(0) < 1) throw std::invalid_argument("operator needs at least one row");
  matrix_ = matrix.to(torch::kComplexDouble).contiguous();
  matrix_f32_ = matrix_.to(torch::kComplexFloat);
  m_ = matrix_.size(0);
}

const torch::Tensor& SensingOperator::matrix_for(torch::ScalarType real_dtype) const {
  switch (real_dtype) {
    case torch::kFloat:
    case torch::kComplexFloat: return matrix_f32_;
    case torch::kDouble:
    case torch::kComplexDouble: return matrix_;
    default: throw std::invalid_argument("sensing operator supports float and double inputs only");
  }
}

torch::Tensor SensingOperator::apply_linear(const torch::Tensor& x) const {
  if (!x.is_complex()) throw std::invalid_argument("forward model expects a complex signal");
  check_image_dims(x, shape_, "SensingOperator");
  const bool single = x.dim() == 2;
  auto flat = single ? x.reshape({1, n()}) : x.reshape({-1, n()});
  auto z = torch::matmul(flat, matrix_for(x.scalar_type()).transpose(0, 1));
  return single ? z.squeeze(0) : z;
}

torch::Tensor SensingOperator::forward(const torch::Tensor& x) const {
  auto z = apply_linear(x);
  // |z|^2 through real/imag parts keeps the gradient finite at z = 0.
  return torch::real(z).square() + torch::imag(z).square();
}

torch::Tensor SensingOperator::adjoint(const torch::Tensor& v) const {
  if (v.dim() < 1 || v.size(-1) != m_)
    throw ShapeError("adjoint expects trailing dim " + std::to_string(m_) + ", got " + c10::str(v.sizes()));
  const auto& a = matrix_for(v.scalar_type());
  auto vc = v.is_complex() ? v : v.to(a.scalar_type());
  const bool single = v.dim() == 1;
  auto rows = single ? vc.reshape({1, m_}) : vc.reshape({-1, m_});
  auto out = torch::matmul(rows, a.conj());
  if (single) return out.reshape({shape_.height, shape_.width});
  return out.reshape({-1, shape_.height, shape_.width});
}

SensingOperator make_operator(int64_t m, ImageShape shape, uint64_t seed) {
  if (m < 1 || shape.height < 1 || shape.width < 1)
    throw std::invalid_argument("make_operator: dimensions must be positive (m=" + std::to_string(m) +
                                ", shape=" + shape.str() + ")");
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  const double sigma = std::sqrt(1.0 / (2.0 * static_cast<double>(m)));
  auto parts = torch::randn({m, shape.numel(), 2}, gen, torch::TensorOptions().dtype(torch::kDouble)) * sigma;
  return {torch::view_as_complex(parts), shape, seed};
}

SensingOperator make_operator(int64_t m, int64_t n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_operator: n must be positive");
  const auto side = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
  const ImageShape shape = side * side == n ? ImageShape{side, side} : ImageShape{1, n};
  return make_operator(m, shape, seed);
}

torch::Tensor forward(const SensingOperator& op, const ComplexImage& x) {
  if (x.size() != op.n())
    throw ShapeError("forward: operator has n=" + std::to_string(op.n()) + ", image has " +
                     std::to_string(x.size()) + " pixels");
  return op.forward(x.values().reshape({op.shape().height, op.shape().width}));
}

ComplexImage adjoint(const SensingOperator& op, const torch::Tensor& v) {
  if (v.dim() != 1) throw ShapeError("adjoint: expected a single m-vector");
  return {op.adjoint(v), op.shape()};
}

torch::Tensor synthesize_phase(const torch::Tensor& x0) {
  if (x0.is_complex()) throw std::invalid_argument("phase images must be real");
  if (!torch::isfinite(x0).all().item<bool>()) throw std::invalid_argument("phase image has non-finite values");
  auto phase = x0.is_floating_point() ? x0 : x0.to(torch::kDouble);
  return torch::polar(torch::ones_like(phase), phase);
}

ComplexImage synthesize_phase_image(const torch::Tensor& x0) {
  if (x0.dim() != 2) throw ShapeError("synthesize_phase_image expects an [H, W] image");
  return {synthesize_phase(x0), {x0.size(0), x0.size(1)}};
}

MeasurementBatch MeasurementBatch::without_truths() const { return {measurements, std::nullopt}; }

MeasurementBatch MeasurementBatch::select(const torch::Tensor& index) const {
  MeasurementBatch out{measurements.index_select(0, index), std::nullopt};
  if (truths) out.truths = truths->index_select(0, index);
  return out;
}

MeasurementBatch MeasurementBatch::to(torch::ScalarType real_dtype) const {
  MeasurementBatch out{measurements.to(real_dtype), std::nullopt};
  if (truths) out.truths = truths->to(complex_counterpart(real_dtype));
  return out;
}

MeasurementBatch make_dataset(const torch::Tensor& images, const SensingOperator& op, bool keep_truth) {
  if (!images.defined() || images.dim() != 3 || images.size(0) == 0)
    throw std::invalid_argument("make_dataset needs a non-empty [N, H, W] image stack");
  check_image_dims(images, op.shape(), "make_dataset");
  auto truths = synthesize_phase(images.to(torch::kDouble));
  MeasurementBatch batch{op.forward(truths), std::nullopt};
  if (keep_truth) batch.truths = truths;
  return batch;
}

std::vector<int64_t> select_fraction(int64_t count, double fraction, uint64_t seed) {
  if (count < 0 || !(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("select_fraction: need count >= 0 and fraction in (0, 1]");
  std::vector<int64_t> order(static_cast<size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto keep = std::min<int64_t>(count, std::llround(fraction * static_cast<double>(count)));
  order.resize(static_cast<size_t>(keep));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace eipr
