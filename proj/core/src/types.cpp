#include "eipr/types.hpp"

#include "eipr/errors.hpp"

namespace eipr {

std::string ImageShape::str() const { return std::to_string(height) + "x" + std::to_string(width); }

ComplexImage::ComplexImage(torch::Tensor values, ImageShape shape) : shape_(shape) {
  if (shape.height <= 0 || shape.width <= 0) throw ShapeError("image shape must be positive, got " + shape.str());
  if (!values.is_complex()) throw ShapeError("ComplexImage needs a complex tensor");
  if (values.numel() != shape.numel())
    throw ShapeError("ComplexImage of shape " + shape.str() + " cannot hold " + std::to_string(values.numel()) +
                     " values");
  if (!torch::isfinite(values.detach()).all().item<bool>())
    throw std::invalid_argument("ComplexImage values must be finite");
  values_ = values.reshape({shape.height, shape.width});
}

ComplexImage ComplexImage::zeros(ImageShape shape, torch::ScalarType dtype) {
  return {torch::zeros({shape.height, shape.width}, torch::TensorOptions().dtype(dtype)), shape};
}

void check_image_dims(const torch::Tensor& t, ImageShape shape, const char* what) {
  if (t.dim() < 2 || t.size(-2) != shape.height || t.size(-1) != shape.width)
    throw ShapeError(std::string(what) + ": expected trailing dims " + shape.str() + ", got " +
                     c10::str(t.sizes()));
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

torch::ScalarType complex_counterpart(torch::ScalarType real) {
  switch (real) {
    case torch::kFloat: return torch::kComplexFloat;
    case torch::kDouble: return torch::kComplexDouble;
    case torch::kComplexFloat:
    case torch::kComplexDouble: return real;
    default: throw std::invalid_argument("expected a float or double dtype");
  }
}

torch::ScalarType real_counterpart(torch::ScalarType complex) {
  switch (complex) {
    case torch::kComplexFloat: return torch::kFloat;
    case torch::kComplexDouble: return torch::kDouble;
    case torch::kFloat:
    case torch::kDouble: return complex;
    default: throw std::invalid_argument("expected a complex dtype");
  }
}

}  // namespace eipr
