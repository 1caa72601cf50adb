#pragma once

#include <torch/torch.h>

#include "eipr/sensing.hpp"
#include "eipr/types.hpp"

namespace eipr {

/// Norms below this are treated as a zero signal.
inline constexpr double kNormEpsilon = 1e-12;

/// What to do when either argument of the cosine similarity has (near) zero norm.
/// Training wants a finite, maximally penalizing value; evaluation wants an error.
enum class DegeneratePolicy { ReturnZero, Raise };

struct SimilarityScore {
  double value = 0.0;  // in [0, 1]
  bool degenerate = false;
};

/// |<x, xh>| / (|x| |xh|) over the trailing two dims, one value per leading index.
/// Differentiable in both arguments away from zero vectors. Degenerate rows give 0
/// (ReturnZero) or throw DegenerateInputError (Raise).
torch::Tensor cosine_similarity(const torch::Tensor& x, const torch::Tensor& xh,
                                DegeneratePolicy policy = DegeneratePolicy::ReturnZero);

/// Count of rows in a batch whose norm product falls below kNormEpsilon.
int64_t count_degenerate(const torch::Tensor& x, const torch::Tensor& xh);

SimilarityScore cosine_similarity(const ComplexImage& x, const ComplexImage& xh,
                                  DegeneratePolicy policy = DegeneratePolicy::ReturnZero);

struct AlignedImage {
  ComplexImage image;
  bool degenerate = false;  // <reference, xh> == 0; image is xh unchanged
};

/// exp(-i arg<reference, xh>) xh: the member of xh's global-phase orbit closest to
/// `reference`.
AlignedImage align_global_phase(const ComplexImage& reference, const ComplexImage& xh);
/// Batched form over the trailing two dims; zero inner products pass through.
torch::Tensor align_global_phase(const torch::Tensor& reference, const torch::Tensor& xh);

/// Least-squares r with forward(op, xh) ≈ r^2 y. Throws DegenerateInputError when y
/// or the remeasured intensities vanish.
double recover_scale(const torch::Tensor& y, const ComplexImage& xh, const SensingOperator& op);

}  // namespace eipr
