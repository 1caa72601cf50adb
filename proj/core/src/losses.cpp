#include "eipr/losses.hpp"

#include "eipr/errors.hpp"
#include "eipr/group_actions.hpp"
#include "eipr/metrics.hpp"

namespace eipr {
namespace {

void check_batch(const MeasurementBatch& batch, const SensingOperator& op) {
  if (batch.size() == 0) throw std::invalid_argument("loss needs a non-empty batch");
  if (batch.measurements.dim() != 2 || batch.measurements.size(1) != op.m())
    throw ShapeError("measurements must be [B, " + std::to_string(op.m()) + "], got " +
                     c10::str(batch.measurements.sizes()));
}

torch::Tensor reduce(const torch::Tensor& per_sample, Reduction reduction) {
  return reduction == Reduction::Mean ? per_sample.mean() : per_sample.sum();
}

torch::Tensor reconstruct_checked(const ReconstructorFn& f, const torch::Tensor& y, const SensingOperator& op) {
  auto x = f(y);
  if (x.dim() != 3 || x.size(0) != y.size(0)) throw ShapeError("reconstructor must return [B, H, W] images");
  check_image_dims(x, op.shape(), "reconstructor output");
  return x;
}

}  // namespace

LossValue loss_mc_intensity(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                            Reduction reduction) {
  check_batch(batch, op);
  const auto& y = batch.measurements;
  auto yhat = op.forward(reconstruct_checked(f, y, op));
  auto total = reduce((y - yhat).square().sum(-1), reduction);
  return {total, {{"mc", total.item<double>()}}, 0};
}

LossValue loss_mc_amplitude(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                            Reduction reduction) {
  check_batch(batch, op);
  const auto& y = batch.measurements;
  if ((y < 0).any().item<bool>()) throw std::invalid_argument("amplitude loss needs non-negative measurements");
  auto yhat = op.forward(reconstruct_checked(f, y, op));
  auto residual = torch::sqrt(y) - torch::sqrt(yhat.clamp_min(0.0));
  auto total = reduce(residual.square().sum(-1), reduction);
  return {total, {{"mc", total.item<double>()}}, 0};
}

LossValue loss_ei(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                  int64_t shifts_per_image, Rng& rng, Reduction reduction) {
  check_batch(batch, op);
  if (shifts_per_image < 1) throw std::invalid_argument("loss_ei: shifts_per_image must be >= 1");
  auto x1_base = reconstruct_checked(f, batch.measurements, op);
  const auto b = x1_base.size(0);

  std::vector<ShiftTransform> shifts;
  shifts.reserve(static_cast<size_t>(b * shifts_per_image));
  for (int64_t i = 0; i < b; ++i)
    for (auto& g : sample_shifts(shifts_per_image, op.shape(), rng)) shifts.push_back(g);

  auto x1 = apply_per_image(shifts, x1_base, shifts_per_image);
  auto x2 = reconstruct_checked(f, op.forward(x1), op);
  auto cs = cosine_similarity(x1, x2, DegeneratePolicy::ReturnZero);
  auto total = -reduce(cs, reduction);
  return {total, {{"ei", total.item<double>()}}, count_degenerate(x1, x2)};
}

LossValue loss_total(const MeasurementBatch& batch, const ReconstructorFn& f, const SensingOperator& op,
                     const TotalLossOptions& options, Rng& rng) {
  if (!(options.lambda >= 0.0)) throw std::invalid_argument("loss_total: lambda must be non-negative");
  auto mc = options.mc_variant == McVariant::Amplitude ? loss_mc_amplitude(batch, f, op, options.reduction)
                                                       : loss_mc_intensity(batch, f, op, options.reduction);
  if (options.mc_normalization == McNormalization::PerMeasurement) {
    mc.total = mc.total / static_cast<double>(op.m());
    mc.components["mc"] /= static_cast<double>(op.m());
  }
  if (options.lambda == 0.0) {
    mc.components["ei"] = 0.0;
    return mc;
  }
  auto ei = loss_ei(batch, f, op, options.shifts_per_image, rng, options.reduction);
  LossValue out;
  out.total = mc.total + options.lambda * ei.total;
  out.components = {{"mc", mc.components.at("mc")}, {"ei", ei.components.at("ei")}};
  out.degenerate = ei.degenerate;
  return out;
}

LossValue loss_supervised(const MeasurementBatch& batch, const ReconstructorFn& f, Reduction reduction) {
  if (!batch.has_truths()) throw std::invalid_argument("supervised loss needs ground-truth images");
  if (batch.size() == 0) throw std::invalid_argument("loss needs a non-empty batch");
  const auto& truths = *batch.truths;
  auto x = f(batch.measurements);
  if (x.sizes() != truths.sizes())
    throw ShapeError("reconstruction shape " + c10::str(x.sizes()) + " differs from truth " +
                     c10::str(truths.sizes()));
  auto cs = cosine_similarity(truths, x, DegeneratePolicy::ReturnZero);
  auto total = -reduce(cs, reduction);
  return {total, {{"sup", total.item<double>()}}, count_degenerate(truths, x)};
}

}  // namespace eipr
