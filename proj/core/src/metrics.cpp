#include "eipr/metrics.hpp"

#include <cmath>

#include "eipr/errors.hpp"

namespace eipr {
namespace {

torch::Tensor flatten_rows(const torch::Tensor& t) {
  if (t.dim() <= 2) return t.reshape({1, -1});
  return t.flatten(-2);
}

// |<x, xh>| with <x, xh> = sum conj(x) xh; real and imaginary parts kept separate
// so the modulus is assembled from smooth pieces.
torch::Tensor inner_product(const torch::Tensor& x, const torch::Tensor& xh) {
  return (torch::conj(x) * xh).sum(-1);
}

torch::Tensor squared_norm(const torch::Tensor& x) {
  return x.is_complex() ? (torch::real(x).square() + torch::imag(x).square()).sum(-1) : x.square().sum(-1);
}

}  // namespace

torch::Tensor cosine_similarity(const torch::Tensor& x, const torch::Tensor& xh, DegeneratePolicy policy) {
  if (x.sizes() != xh.sizes())
    throw ShapeError("cosine_similarity: shapes differ " + c10::str(x.sizes()) + " vs " + c10::str(xh.sizes()));
  const bool single = x.dim() <= 2;
  auto a = flatten_rows(x);
  auto b = flatten_rows(xh);
  auto ip = inner_product(a, b);
  // sqrt has no derivative at 0; route zero inner products through a dummy value.
  auto ip_sq = torch::real(ip).square() + torch::imag(ip).square();
  auto positive = ip_sq.detach() > 0;
  auto num = torch::where(positive, torch::sqrt(torch::where(positive, ip_sq, torch::ones_like(ip_sq))),
                          torch::zeros_like(ip_sq));
  auto denom_sq = squared_norm(a) * squared_norm(b);
  const double eps_sq = kNormEpsilon * kNormEpsilon;
  auto degenerate = denom_sq.detach() < eps_sq;
  if (policy == DegeneratePolicy::Raise && degenerate.any().item<bool>())
    throw DegenerateInputError("cosine similarity of a zero-norm signal");
  // Clamping before the root keeps the gradient of the unused branch finite.
  auto cs = num / torch::sqrt(denom_sq.clamp_min(eps_sq));
  cs = torch::where(degenerate, torch::zeros_like(cs), cs);
  return single ? cs.squeeze(0) : cs;
}

int64_t count_degenerate(const torch::Tensor& x, const torch::Tensor& xh) {
  auto d = squared_norm(flatten_rows(x.detach())) * squared_norm(flatten_rows(xh.detach()));
  return (d < kNormEpsilon * kNormEpsilon).sum().item<int64_t>();
}

SimilarityScore cosine_similarity(const ComplexImage& x, const ComplexImage& xh, DegeneratePolicy policy) {
  if (x.size() != xh.size()) throw ShapeError("cosine_similarity: images differ in size");
  auto a = x.flat().to(torch::kComplexDouble);
  auto b = xh.flat().to(torch::kComplexDouble);
  SimilarityScore score;
  score.degenerate = count_degenerate(a.reshape({1, 1, -1}), b.reshape({1, 1, -1})) > 0;
  score.value = cosine_similarity(a.reshape({1, -1}), b.reshape({1, -1}), policy).item<double>();
  return score;
}

AlignedImage align_global_phase(const ComplexImage& reference, const ComplexImage& xh) {
  if (reference.size() != xh.size()) throw ShapeError("align_global_phase: images differ in size");
  auto ip = inner_product(reference.flat().to(xh.values().scalar_type()), xh.flat());
  const auto z = ip.item<c10::complex<double>>();
  if (std::abs(z) == 0.0) return {xh, true};
  const double angle = std::arg(z);
  auto rotor = c10::complex<double>(std::cos(-angle), std::sin(-angle));
  return {ComplexImage(xh.values() * rotor, xh.shape()), false};
}

torch::Tensor align_global_phase(const torch::Tensor& reference, const torch::Tensor& xh) {
  if (reference.sizes() != xh.sizes()) throw ShapeError("align_global_phase: shapes differ");
  auto ip = inner_product(flatten_rows(reference), flatten_rows(xh));
  auto mag = torch::abs(ip);
  auto rotor = torch::where(mag > 0, torch::conj(ip) / mag.clamp_min(1e-300), torch::ones_like(ip));
  if (xh.dim() <= 2) return xh * rotor.squeeze(0);
  return xh * rotor.unsqueeze(-1).unsqueeze(-1);
}

double recover_scale(const torch::Tensor& y, const ComplexImage& xh, const SensingOperator& op) {
  if (y.dim() != 1 || y.size(0) != op.m()) throw ShapeError("recover_scale: y must be an m-vector");
  auto yd = y.to(torch::kDouble);
  auto yhat = forward(op, xh).to(torch::kDouble);
  const double denom = yd.square().sum().item<double>();
  const double num = (yhat * yd).sum().item<double>();
  if (!(denom > 0.0) || !(num > 0.0))
    throw DegenerateInputError("recover_scale: measurements or remeasured intensities vanish");
  return std::sqrt(num / denom);
}

}  // namespace eipr
