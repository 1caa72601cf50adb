#include <gtest/gtest.h>

#include "eipr_test_support.hpp"

using namespace eipr;
using namespace eipr::testing;

namespace {

const ImageShape kShape{2, 3};

struct Problem {
  SensingOperator op;
  MeasurementBatch batch;
  torch::Tensor theta;  // [2, n, m] real parameters of a linear reconstructor
};

Problem small_problem(int64_t batch = 3, uint64_t seed = 1) {
  auto op = make_operator(12, kShape, seed);
  auto truths = unit_modulus({batch, kShape.height, kShape.width}, seed + 10);
  MeasurementBatch data{op.forward(truths), truths};
  auto theta = 0.3 * torch::randn({2, kShape.numel(), op.m()}, generator(seed + 20), torch::kDouble);
  return {op, data, theta};
}

void expect_gradient_matches(const std::function<torch::Tensor(const torch::Tensor&)>& loss, const torch::Tensor& at) {
  auto fd = finite_difference([&](const torch::Tensor& p) { return loss(p).item<double>(); }, at);
  auto ad = autograd_gradient(loss, at);
  EXPECT_LE(relative_error(ad, fd), 1e-4);
  EXPECT_GT(torch::linalg_vector_norm(fd).item<double>(), 0.0);
}

// Reconstructor returning the same image for every input.
ReconstructorFn constant_reconstructor(torch::Tensor image) {
  return [image](const torch::Tensor& y) { return image.unsqueeze(0).expand({y.size(0), -1, -1}).clone(); };
}

}  // namespace

TEST(LossArithmetic, HandComputedResiduals) {
  SensingOperator op(torch::eye(2, torch::kComplexDouble), ImageShape{1, 2}, 0);
  MeasurementBatch batch{torch::tensor({{4.0, 1.0}}, torch::kDouble), std::nullopt};
  auto f = constant_reconstructor(torch::ones({1, 2}, torch::kComplexDouble));
  // (4 - 1)^2 + (1 - 1)^2 and (2 - 1)^2 + (1 - 1)^2.
  EXPECT_DOUBLE_EQ(loss_mc_intensity(batch, f, op).value(), 9.0);
  EXPECT_DOUBLE_EQ(loss_mc_amplitude(batch, f, op).value(), 1.0);
}

TEST(LossArithmetic, ReductionScalesWithBatch) {
  auto p = small_problem(4);
  auto f = linear_reconstructor(p.theta, kShape);
  auto mean = loss_mc_intensity(p.batch, f, p.op, Reduction::Mean).value();
  auto sum = loss_mc_intensity(p.batch, f, p.op, Reduction::Sum).value();
  EXPECT_NEAR(sum, 4.0 * mean, 1e-12 * sum);
}

TEST(LossMinima, MeasurementConsistentOracleHasZeroMc) {
  auto p = small_problem(4);
  LookupOracle oracle(*p.batch.truths, p.op);
  EXPECT_NEAR(loss_mc_intensity(p.batch, oracle.fn(), p.op).value(), 0.0, 1e-24);
  EXPECT_NEAR(loss_mc_amplitude(p.batch, oracle.fn(), p.op).value(), 0.0, 1e-24);
}

TEST(LossMinima, EquivariantOracleReachesFloor) {
  auto p = small_problem(4);
  LookupOracle oracle(*p.batch.truths, p.op);
  Rng rng(3);
  EXPECT_NEAR(loss_ei(p.batch, oracle.fn(), p.op, 2, rng, Reduction::Sum).value(), -8.0, 1e-12);
  EXPECT_NEAR(loss_ei(p.batch, oracle.fn(), p.op, 5, rng, Reduction::Sum).value(), -20.0, 1e-12);
  EXPECT_NEAR(loss_ei(p.batch, oracle.fn(), p.op, 2, rng, Reduction::Mean).value(), -1.0, 1e-12);
}

TEST(LossMinima, SupervisedOracleReachesMinusOne) {
  auto p = small_problem(4);
  LookupOracle oracle(*p.batch.truths, p.op);
  EXPECT_NEAR(loss_supervised(p.batch, oracle.fn()).value(), -1.0, 1e-12);
  EXPECT_NEAR(loss_supervised(p.batch, oracle.fn(), Reduction::Sum).value(), -4.0, 1e-12);
}

TEST(LossMinima, ConstantImagesAreEquivariantButNotConsistent) {
  // A constant image is fixed by every shift, so the equivariance term alone
  // cannot rule it out; measurement consistency does.
  auto p = small_problem(3);
  auto f = constant_reconstructor(torch::full({2, 3}, c10::complex<double>(0.5, 0.5), torch::kComplexDouble));
  Rng rng(4);
  EXPECT_NEAR(loss_ei(p.batch, f, p.op, 2, rng).value(), -1.0, 1e-12);
  EXPECT_GT(loss_mc_amplitude(p.batch, f, p.op).value(), 1e-2);
}

TEST(LossGradients, IntensityMatchesFiniteDifferences) {
  auto p = small_problem();
  expect_gradient_matches(
      [&](const torch::Tensor& t) { return loss_mc_intensity(p.batch, linear_reconstructor(t, kShape), p.op).total; },
      p.theta);
}

TEST(LossGradients, AmplitudeMatchesFiniteDifferences) {
  auto p = small_problem();
  expect_gradient_matches(
      [&](const torch::Tensor& t) { return loss_mc_amplitude(p.batch, linear_reconstructor(t, kShape), p.op).total; },
      p.theta);
}

TEST(LossGradients, EquivarianceMatchesFiniteDifferences) {
  auto p = small_problem();
  expect_gradient_matches(
      [&](const torch::Tensor& t) {
        Rng rng(5);  // identical shifts on every evaluation
        return loss_ei(p.batch, linear_reconstructor(t, kShape), p.op, 2, rng).total;
      },
      p.theta);
}

TEST(LossGradients, SupervisedMatchesFiniteDifferences) {
  auto p = small_problem();
  expect_gradient_matches(
      [&](const torch::Tensor& t) { return loss_supervised(p.batch, linear_reconstructor(t, kShape)).total; },
      p.theta);
}

TEST(LossGradients, TotalMatchesFiniteDifferences) {
  auto p = small_problem();
  TotalLossOptions options;
  options.lambda = 0.7;
  expect_gradient_matches(
      [&](const torch::Tensor& t) {
        Rng rng(6);
        return loss_total(p.batch, linear_reconstructor(t, kShape), p.op, options, rng).total;
      },
      p.theta);
}

TEST(LossTotal, ZeroLambdaIsExactlyMcAndDrawsNoShifts) {
  auto p = small_problem();
  auto f = linear_reconstructor(p.theta, kShape);
  TotalLossOptions options;
  options.lambda = 0.0;
  Rng rng(7);
  const Rng before = rng;
  auto total = loss_total(p.batch, f, p.op, options, rng);
  EXPECT_EQ(total.value(), loss_mc_amplitude(p.batch, f, p.op).value());
  EXPECT_TRUE(rng == before);
  EXPECT_EQ(total.components.at("ei"), 0.0);
}

TEST(LossTotal, RecomputesAsMcPlusLambdaEi) {
  auto p = small_problem();
  auto f = linear_reconstructor(p.theta, kShape);
  for (double lambda : {1.0, 2.5}) {
    for (auto variant : {McVariant::Amplitude, McVariant::Intensity}) {
      TotalLossOptions options;
      options.lambda = lambda;
      options.mc_variant = variant;
      Rng a(8);
      Rng b(8);
      auto total = loss_total(p.batch, f, p.op, options, a);
      auto mc = variant == McVariant::Amplitude ? loss_mc_amplitude(p.batch, f, p.op) : loss_mc_intensity(p.batch, f, p.op);
      auto ei = loss_ei(p.batch, f, p.op, options.shifts_per_image, b);
      const double expected = mc.value() + lambda * ei.value();
      EXPECT_NEAR(total.value(), expected, 1e-12 * std::abs(expected));
      EXPECT_DOUBLE_EQ(total.components.at("mc"), mc.value());
      EXPECT_DOUBLE_EQ(total.components.at("ei"), ei.value());
    }
  }
}

TEST(LossTotal, PerMeasurementNormalizationDividesOnlyMc) {
  auto p = small_problem();
  auto f = linear_reconstructor(p.theta, kShape);
  TotalLossOptions sum;
  sum.lambda = 1.5;
  auto per = sum;
  per.mc_normalization = McNormalization::PerMeasurement;
  Rng a(12);
  Rng b(12);
  auto s = loss_total(p.batch, f, p.op, sum, a);
  auto q = loss_total(p.batch, f, p.op, per, b);
  const double m = static_cast<double>(p.op.m());
  EXPECT_DOUBLE_EQ(q.components.at("mc"), s.components.at("mc") / m);
  EXPECT_DOUBLE_EQ(q.components.at("ei"), s.components.at("ei"));
  const double expected = s.components.at("mc") / m + 1.5 * s.components.at("ei");
  EXPECT_NEAR(q.value(), expected, 1e-12 * std::abs(expected));
}

TEST(LossInvariance, GlobalPhaseOfReconstructorDoesNotMatter) {
  auto p = small_problem();
  auto f = linear_reconstructor(p.theta, kShape);
  const auto rotor = polar(1.0, 1.3);
  ReconstructorFn g = [&](const torch::Tensor& y) { return f(y) * rotor; };
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1.0); };
  EXPECT_TRUE(close(loss_mc_intensity(p.batch, f, p.op).value(), loss_mc_intensity(p.batch, g, p.op).value()));
  EXPECT_TRUE(close(loss_mc_amplitude(p.batch, f, p.op).value(), loss_mc_amplitude(p.batch, g, p.op).value()));
  EXPECT_TRUE(close(loss_supervised(p.batch, f).value(), loss_supervised(p.batch, g).value()));
  Rng a(9);
  Rng b(9);
  EXPECT_TRUE(close(loss_ei(p.batch, f, p.op, 2, a).value(), loss_ei(p.batch, g, p.op, 2, b).value()));
}

TEST(LossErrors, RejectInvalidInput) {
  auto p = small_problem();
  auto f = linear_reconstructor(p.theta, kShape);
  Rng rng(10);

  auto negative = p.batch;
  negative.measurements = p.batch.measurements.clone();
  negative.measurements[0][0] = -1.0;
  EXPECT_THROW(loss_mc_amplitude(negative, f, p.op), std::invalid_argument);

  EXPECT_THROW(loss_supervised(p.batch.without_truths(), f), std::invalid_argument);

  MeasurementBatch wrong{torch::ones({2, 5}, torch::kDouble), std::nullopt};
  EXPECT_THROW(loss_mc_intensity(wrong, f, p.op), ShapeError);

  MeasurementBatch empty{torch::ones({0, 12}, torch::kDouble), std::nullopt};
  EXPECT_THROW(loss_mc_intensity(empty, f, p.op), std::invalid_argument);

  ReconstructorFn bad_shape = [](const torch::Tensor& y) { return torch::zeros({y.size(0), 3, 2}, torch::kComplexDouble); };
  EXPECT_THROW(loss_mc_intensity(p.batch, bad_shape, p.op), ShapeError);

  EXPECT_THROW(loss_ei(p.batch, f, p.op, 0, rng), std::invalid_argument);
  TotalLossOptions options;
  options.lambda = -1.0;
  EXPECT_THROW(loss_total(p.batch, f, p.op, options, rng), std::invalid_argument);
}

TEST(LossDegenerate, ZeroReconstructionIsCountedNotThrown) {
  auto p = small_problem();
  auto f = constant_reconstructor(torch::zeros({2, 3}, torch::kComplexDouble));
  Rng rng(11);
  auto ei = loss_ei(p.batch, f, p.op, 2, rng);
  EXPECT_EQ(ei.value(), 0.0);
  EXPECT_EQ(ei.degenerate, 6);
  EXPECT_EQ(loss_supervised(p.batch, f).degenerate, 3);
}
