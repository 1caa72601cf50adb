#include <benchmark/benchmark.h>

#include "eipr/eipr.hpp"

using namespace eipr;

namespace {

const ImageShape kMnist{28, 28};

torch::Tensor phase_batch(int64_t count, uint64_t seed) {
  auto gen = at::detail::createCPUGenerator(seed);
  return synthesize_phase(torch::rand({count, 28, 28}, gen, torch::kDouble));
}

ReconstructorConfig narrow_net() {
  ReconstructorConfig c;
  c.base_channels = 16;
  return c;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  auto op = make_operator(measurements_for(0.8, 784), kMnist, 1);
  auto x = phase_batch(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(op.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(32);

static void BM_UNetForward(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  PhaseReconstructor model(narrow_net(), 3);
  auto op = make_operator(measurements_for(0.8, 784), kMnist, 1);
  auto y = op.forward(phase_batch(state.range(0), 4)).to(torch::kFloat);
  for (auto _ : state) benchmark::DoNotOptimize(model.reconstruct(y, op));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UNetForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

// One self-supervised step: loss evaluation and backward pass.
static void BM_TotalLossStep(benchmark::State& state) {
  PhaseReconstructor model(narrow_net(), 5);
  auto op = make_operator(measurements_for(0.8, 784), kMnist, 1);
  MeasurementBatch batch{op.forward(phase_batch(state.range(0), 6)).to(torch::kFloat), std::nullopt};
  ReconstructorFn f = [&](const torch::Tensor& y) { return model.reconstruct(y, op); };
  Rng rng(7);
  for (auto _ : state) {
    model.network()->zero_grad();
    loss_total(batch, f, op, TotalLossOptions{}, rng).total.backward();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TotalLossStep)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_GdStep(benchmark::State& state) {
  auto op = make_operator(measurements_for(0.8, 784), kMnist, 1);
  auto x = phase_batch(1, 8)[0];
  auto y = op.forward(x);
  auto z = backproject(y, op);
  for (auto _ : state) benchmark::DoNotOptimize(gd_descend(y, op, z, 1, 0.4, McVariant::Amplitude));
}
BENCHMARK(BM_GdStep)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
