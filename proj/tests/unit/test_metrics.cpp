#include <gtest/gtest.h>

#include "eipr_test_support.hpp"

using namespace eipr;
using namespace eipr::testing;

TEST(CosineSimilarity, EqualsOneOnPhaseAndScaleOrbit) {
  auto x = complex_randn({6, 7}, 1);
  for (double phi : {0.0, 0.9, -2.2, M_PI}) {
    for (double r : {1e-3, 0.5, 1.0, 40.0}) {
      auto xh = x * polar(r, phi);
      EXPECT_NEAR(eipr::cosine_similarity(x, xh).item<double>(), 1.0, 1e-12) << phi << " " << r;
    }
  }
}

TEST(CosineSimilarity, InvariantUnderOrbitOfEitherArgument) {
  auto x = complex_randn({5, 5}, 2);
  auto xh = complex_randn({5, 5}, 3);
  const double base = eipr::cosine_similarity(x, xh).item<double>();
  auto moved = eipr::cosine_similarity(x * polar(3.0, 1.1), xh * polar(0.2, -0.4)).item<double>();
  EXPECT_NEAR(moved, base, 1e-12 * base);
}

TEST(CosineSimilarity, IsSymmetricAndBounded) {
  for (uint64_t s = 0; s < 20; ++s) {
    auto a = complex_randn({4, 4}, 10 + s);
    auto b = complex_randn({4, 4}, 100 + s);
    auto ab = eipr::cosine_similarity(a, b).item<double>();
    EXPECT_NEAR(ab, eipr::cosine_similarity(b, a).item<double>(), 1e-15);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-15);
  }
}

TEST(CosineSimilarity, OrthogonalSignalsScoreZero) {
  auto a = torch::zeros({2, 2}, torch::kComplexDouble);
  auto b = torch::zeros({2, 2}, torch::kComplexDouble);
  a[0][0] = 1.0;
  b[1][1] = c10::complex<double>(0.0, 1.0);
  EXPECT_EQ(eipr::cosine_similarity(a, b).item<double>(), 0.0);
}

TEST(CosineSimilarity, BatchedRowsMatchSingles) {
  auto a = complex_randn({3, 4, 4}, 4);
  auto b = complex_randn({3, 4, 4}, 5);
  auto cs = eipr::cosine_similarity(a, b);
  ASSERT_EQ(cs.sizes(), (std::vector<int64_t>{3}));
  for (int64_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(cs[i].item<double>(), eipr::cosine_similarity(a[i], b[i]).item<double>());
}

TEST(CosineSimilarity, DegeneratePolicies) {
  auto x = complex_randn({3, 3}, 6);
  auto zero = torch::zeros({3, 3}, torch::kComplexDouble);
  EXPECT_EQ(eipr::cosine_similarity(x, zero).item<double>(), 0.0);
  EXPECT_THROW(eipr::cosine_similarity(x, zero, DegeneratePolicy::Raise), DegenerateInputError);
  EXPECT_EQ(count_degenerate(torch::stack({x, zero}), torch::stack({x, x})), 1);

  auto score = eipr::cosine_similarity(ComplexImage(x, {3, 3}), ComplexImage::zeros({3, 3}));
  EXPECT_TRUE(score.degenerate);
  EXPECT_EQ(score.value, 0.0);
  EXPECT_THROW(eipr::cosine_similarity(x, complex_randn({2, 2}, 1)), ShapeError);
}

TEST(CosineSimilarity, ZeroGuardKeepsGradientsFinite) {
  auto x = complex_randn({3, 3}, 7);
  auto zero = torch::zeros({3, 3}, torch::kComplexDouble).requires_grad_(true);
  auto cs = eipr::cosine_similarity(x, zero);
  cs.backward();
  EXPECT_TRUE(torch::isfinite(torch::view_as_real(zero.grad())).all().item<bool>());
}

TEST(CosineSimilarity, GradientMatchesFiniteDifferences) {
  auto x = complex_randn({3, 4}, 8);
  auto theta = torch::randn({2, 3, 4}, generator(9), torch::kDouble);
  auto eval = [&](const torch::Tensor& p) { return eipr::cosine_similarity(x, torch::complex(p[0], p[1])); };
  auto fd = finite_difference([&](const torch::Tensor& p) { return eval(p).item<double>(); }, theta);
  auto ad = autograd_gradient(eval, theta);
  EXPECT_LE(relative_error(ad, fd), 1e-4);
}

TEST(AlignGlobalPhase, RecoversRotatedCopy) {
  auto x = complex_randn({4, 4}, 10);
  ComplexImage truth(x, {4, 4});
  ComplexImage rotated(x * polar(2.0, 2.5), {4, 4});
  auto aligned = align_global_phase(truth, rotated);
  EXPECT_FALSE(aligned.degenerate);
  EXPECT_LE(relative_error(aligned.image.values(), x * 2.0), 1e-14);
}

TEST(AlignGlobalPhase, AlignedInnerProductIsRealPositive) {
  auto x = complex_randn({8}, 11).view({2, 4});
  auto xh = complex_randn({8}, 12).view({2, 4});
  auto aligned = align_global_phase(x, xh);
  auto ip = torch::vdot(x.flatten(), aligned.flatten()).item<c10::complex<double>>();
  EXPECT_GT(ip.real(), 0.0);
  EXPECT_NEAR(ip.imag(), 0.0, 1e-12 * ip.real());
}

TEST(AlignGlobalPhase, OrthogonalInputPassesThroughFlagged) {
  auto a = torch::zeros({2, 2}, torch::kComplexDouble);
  auto b = torch::zeros({2, 2}, torch::kComplexDouble);
  a[0][0] = 1.0;
  b[1][0] = 3.0;
  auto aligned = align_global_phase(ComplexImage(a, {2, 2}), ComplexImage(b, {2, 2}));
  EXPECT_TRUE(aligned.degenerate);
  EXPECT_TRUE(torch::equal(aligned.image.values(), b));
  EXPECT_TRUE(torch::equal(align_global_phase(a.unsqueeze(0), b.unsqueeze(0)), b.unsqueeze(0)));
}

TEST(RecoverScale, ReturnsLeastSquaresRadius) {
  auto op = make_operator(40, ImageShape{4, 4}, 3);
  auto x = complex_randn({4, 4}, 13);
  auto y = op.forward(x);
  for (double r : {0.5, 1.0, 2.5}) {
    ComplexImage xh(x * polar(r, 0.7), {4, 4});
    EXPECT_NEAR(recover_scale(y, xh, op), r, 1e-12 * r);
  }
  EXPECT_THROW(recover_scale(y, ComplexImage::zeros({4, 4}), op), DegenerateInputError);
  EXPECT_THROW(recover_scale(y.narrow(0, 0, 5), ComplexImage(x, {4, 4}), op), ShapeError);
}
