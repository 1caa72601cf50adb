#include "eipr/baseline_gd.hpp"

#include <cmath>

#include <ATen/CPUGeneratorImpl.h>

#include "eipr/errors.hpp"
#include "eipr/reconstructor.hpp"

namespace eipr {
namespace {

struct RowsResult {
  torch::Tensor images;     // [N, H, W]
  torch::Tensor objective;  // [N]
  torch::Tensor initial;    // [N]
  torch::Tensor restart;    // [N] int64
};

torch::Tensor as_rows(const torch::Tensor& t, int64_t trailing_dims) {
  return t.dim() == trailing_dims ? t.unsqueeze(0) : t;
}

// Objective per row for y [B, m], z [B, H, W].
torch::Tensor objective_rows(const torch::Tensor& y, const SensingOperator& op, const torch::Tensor& z,
                             McVariant objective) {
  auto yhat = op.forward(z);
  if (objective == McVariant::Amplitude) return (torch::sqrt(yhat) - torch::sqrt(y.clamp_min(0.0))).square().sum(-1);
  return (yhat - y).square().sum(-1);
}

torch::Tensor gradient_rows(const torch::Tensor& y, const SensingOperator& op, const torch::Tensor& z,
                            McVariant objective) {
  auto u = op.apply_linear(z);
  torch::Tensor residual;
  if (objective == McVariant::Amplitude) {
    auto mag = torch::abs(u);
    // u/|u| is taken as 0 where u vanishes.
    auto phase = torch::where(mag > 0, u / mag.clamp_min(1e-300), torch::zeros_like(u));
    residual = 2.0 * (u - torch::sqrt(y.clamp_min(0.0)) * phase);
  } else {
    auto intensity = torch::real(u).square() + torch::imag(u).square();
    residual = 4.0 * (intensity - y) * u;
  }
  return op.adjoint(residual);
}

RowsResult solve_rows(const torch::Tensor& measurements, const SensingOperator& op, const GdConfig& config,
                      int64_t first_index) {
  const auto n_rows = measurements.size(0);
  const auto r = config.restarts;
  const auto shape = op.shape();
  auto y = measurements.to(torch::kDouble);
  auto y_rep = y.repeat_interleave(r, 0);  // row i*r + k is sample i, restart k

  auto starts = torch::empty({n_rows * r, shape.height, shape.width}, torch::kComplexDouble);
  for (int64_t i = 0; i < n_rows; ++i) {
    const double energy = std::sqrt(std::max(0.0, y[i].sum().item<double>()));
    for (int64_t k = 0; k < r; ++k) {
      torch::Tensor z0;
      if (k == 0 && config.init == GdInit::Backprojection) {
        z0 = backproject(y[i], op);
      } else {
        auto gen = at::make_generator<at::CPUGeneratorImpl>(
            mix_seed(config.seed, static_cast<uint64_t>((first_index + i) * r + k)));
        auto parts = torch::randn({shape.height, shape.width, 2}, gen, torch::kDouble);
        z0 = torch::view_as_complex(parts);
        const double norm = torch::linalg_vector_norm(z0).item<double>();
        z0 = z0 * (energy / std::max(norm, 1e-300));
      }
      starts[i * r + k] = z0;
    }
  }

  auto initial = objective_rows(y_rep, op, starts, config.objective);
  auto z = gd_descend(y_rep, op, starts, config.steps, config.step_size, config.objective);
  auto final_obj = objective_rows(y_rep, op, z, config.objective);
  // Non-finite runs (divergent steps) never win.
  final_obj = torch::where(torch::isfinite(final_obj), final_obj, torch::full_like(final_obj, INFINITY));

  auto per_sample = final_obj.reshape({n_rows, r});
  auto best = per_sample.argmin(1);
  auto rows = torch::arange(n_rows, torch::kLong) * r + best;
  return {z.index_select(0, rows), final_obj.index_select(0, rows), initial.index_select(0, rows), best};
}

}  // namespace

void GdConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("GdConfig: steps must be >= 1");
  if (restarts < 1) throw std::invalid_argument("GdConfig: restarts must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw std::invalid_argument("GdConfig: step_size must be > 0");
}

double gd_objective(const torch::Tensor& y, const SensingOperator& op, const torch::Tensor& z, McVariant objective) {
  if (y.dim() != 1 || z.dim() != 2) throw ShapeError("gd_objective expects y [m] and z [H, W]");
  return objective_rows(as_rows(y.to(torch::kDouble), 1), op, as_rows(z.to(torch::kComplexDouble), 2), objective)
      .item<double>();
}

torch::Tensor gd_gradient(const torch::Tensor& y, const SensingOperator& op, const torch::Tensor& z,
                          McVariant objective) {
  const bool single = z.dim() == 2;
  auto g = gradient_rows(as_rows(y.to(torch::kDouble), 1), op, as_rows(z.to(torch::kComplexDouble), 2), objective);
  return single ? g.squeeze(0) : g;
}

torch::Tensor gd_descend(const torch::Tensor& y, const SensingOperator& op, torch::Tensor init, int64_t steps,
                         double step_size, McVariant objective) {
  const bool single = init.dim() == 2;
  auto yr = as_rows(y.to(torch::kDouble), 1);
  auto z = as_rows(init.to(torch::kComplexDouble), 2).clone();
  if (yr.size(0) != z.size(0)) throw ShapeError("gd_descend: measurement and iterate batch sizes differ");
  torch::NoGradGuard guard;
  for (int64_t t = 0; t < steps; ++t) z.sub_(gradient_rows(yr, op, z, objective) * step_size);
  return single ? z.squeeze(0) : z;
}

GdResult solve(const torch::Tensor& y, const SensingOperator& op, const GdConfig& config) {
  config.validate();
  if (y.dim() != 1 || y.size(0) != op.m()) throw ShapeError("solve expects an m-vector");
  torch::NoGradGuard guard;
  auto rows = solve_rows(y.unsqueeze(0), op, config, 0);
  return {ComplexImage(rows.images[0], op.shape()), rows.objective[0].item<double>(), rows.initial[0].item<double>(),
          rows.restart[0].item<int64_t>()};
}

torch::Tensor solve_batch(const torch::Tensor& measurements, const SensingOperator& op, const GdConfig& config) {
  config.validate();
  if (measurements.dim() != 2 || measurements.size(1) != op.m())
    throw ShapeError("solve_batch expects [N, m] measurements");
  torch::NoGradGuard guard;
  constexpr int64_t kChunk = 64;
  std::vector<torch::Tensor> parts;
  for (int64_t start = 0; start < measurements.size(0); start += kChunk) {
    const auto len = std::min(kChunk, measurements.size(0) - start);
    parts.push_back(solve_rows(measurements.narrow(0, start, len), op, config, start).images);
  }
  return torch::cat(parts, 0);
}

}  // namespace eipr
