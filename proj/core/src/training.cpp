#include "eipr/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "eipr/errors.hpp"
#include "eipr/metrics.hpp"

namespace eipr {

std::string to_log_line(const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"step\":%lld,\"epoch\":%lld,\"loss_total\":%.17g,\"loss_mc\":%.17g,\"loss_ei\":%.17g}",
                static_cast<long long>(r.step), static_cast<long long>(r.epoch), r.loss_total, r.loss_mc, r.loss_ei);
  return buf;
}

std::function<LossValue(const MeasurementBatch&, const ReconstructorFn&, Rng&)> make_loss(
    const TrainConfig& config, const SensingOperator& op) {
  if (config.regime == Regime::Supervised) {
    return [](const MeasurementBatch& batch, const ReconstructorFn& f, Rng&) { return loss_supervised(batch, f); };
  }
  TotalLossOptions options;
  options.lambda = config.lambda;
  options.shifts_per_image = config.shifts_per_image;
  options.mc_normalization =
      config.mc_normalization == "per_measurement" ? McNormalization::PerMeasurement : McNormalization::Sum;
  options.mc_variant = config.regime == Regime::SsAmplitude ? McVariant::Amplitude : McVariant::Intensity;
  return [options, op](const MeasurementBatch& batch, const ReconstructorFn& f, Rng& rng) {
    return loss_total(batch, f, op, options, rng);
  };
}

ModelCheckpoint train(const TrainConfig& config, const MeasurementBatch& data, const SensingOperator& op,
                      const TrainOptions& options) {
  config.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.measurements.dim() != 2 || data.measurements.size(1) != op.m())
    throw std::invalid_argument("train: measurements do not match the operator (m=" + std::to_string(op.m()) + ")");
  if (config.regime == Regime::Supervised && !data.has_truths())
    throw std::invalid_argument("train: the supervised regime needs ground-truth images");

  // Self-supervised regimes never get to see truths.
  const MeasurementBatch train_set =
      (is_self_supervised(config.regime) ? data.without_truths() : data).to(torch::kFloat);

  PhaseReconstructor model(config.model_config(op.shape()), mix_seed(config.seed, 1));
  torch::optim::Adam optimizer(model.parameters(), torch::optim::AdamOptions(config.learning_rate));
  Rng rng(mix_seed(config.seed, 2));
  const auto loss_fn = make_loss(config, op);
  const ReconstructorFn f = [&model, &op](const torch::Tensor& y) { return model.reconstruct(y, op); };

  std::ofstream log;
  if (!options.log_path.empty()) {
    const auto parent = std::filesystem::path(options.log_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    log.open(options.log_path, std::ios::app);
    if (!log) throw IoError("cannot open training log '" + options.log_path + "'");
  }

  const int64_t n = train_set.size();
  std::vector<int64_t> order(static_cast<size_t>(n));
  int64_t step = 0;
  for (int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int64_t epoch_steps = 0;
    for (int64_t start = 0; start < n; start += config.batch_size) {
      const auto len = std::min(config.batch_size, n - start);
      auto index = torch::tensor(std::vector<int64_t>(order.begin() + start, order.begin() + start + len), torch::kLong);
      const auto batch = train_set.select(index);

      optimizer.zero_grad();
      auto loss = loss_fn(batch, f, rng);
      loss.total.backward();
      optimizer.step();

      StepRecord record{++step, epoch, loss.value(), 0.0, 0.0};
      if (auto it = loss.components.find("mc"); it != loss.components.end()) record.loss_mc = it->second;
      if (auto it = loss.components.find("ei"); it != loss.components.end()) record.loss_ei = it->second;
      if (log) log << to_log_line(record) << '\n';
      if (options.on_step) options.on_step(record);
      epoch_loss += record.loss_total;
      ++epoch_steps;
    }
    if (log) log.flush();
    if (!options.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03lld.ckpt", static_cast<long long>(epoch));
      save_checkpoint(model.checkpoint(config.manifest(), config.digest(), epoch),
                      (std::filesystem::path(options.checkpoint_dir) / name).string());
    }
    if (options.on_epoch) options.on_epoch(epoch, epoch_loss / static_cast<double>(epoch_steps));
  }
  return model.checkpoint(config.manifest(), config.digest(), config.epochs);
}

EvalResult evaluate(const ReconstructorFn& f, const MeasurementBatch& test, const EvalOptions& options) {
  if (!test.has_truths()) throw std::invalid_argument("evaluate: the test split needs ground-truth images");
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test split");
  torch::NoGradGuard guard;
  const auto& truths = *test.truths;
  std::vector<double> scores;
  scores.reserve(static_cast<size_t>(test.size()));
  EvalResult result;
  const auto batch = std::max<int64_t>(1, options.batch_size);
  for (int64_t start = 0; start < test.size(); start += batch) {
    const auto len = std::min(batch, test.size() - start);
    auto truth = truths.narrow(0, start, len).to(torch::kComplexDouble);
    auto x = f(test.measurements.narrow(0, start, len)).to(torch::kComplexDouble);
    if (x.sizes() != truth.sizes()) throw ShapeError("evaluate: reconstruction and truth shapes differ");
    auto cs = cosine_similarity(truth, x, DegeneratePolicy::Raise).clamp(0.0, 1.0);
    auto aligned = align_global_phase(truth, x);
    for (int64_t i = 0; i < len; ++i) {
      const auto index = start + i;
      scores.push_back(cs[i].item<double>());
      if (index < options.keep_images)
        result.images.push_back({options.alpha_key, options.regime, index, scores.back(), truth[i].clone(),
                                 aligned[i].clone()});
    }
  }
  const double count = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / count;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  result.stats = {mean, std::sqrt(var / count), static_cast<int64_t>(scores.size())};
  return result;
}

EvalResult evaluate(const ModelCheckpoint& checkpoint, const MeasurementBatch& test, const SensingOperator& op,
                    const EvalOptions& options) {
  if (checkpoint.config.image_shape() != op.shape())
    throw std::invalid_argument("evaluate: checkpoint expects " + checkpoint.config.image_shape().str() +
                                " images, operator has " + op.shape().str());
  if (test.measurements.dim() != 2 || test.measurements.size(1) != op.m())
    throw std::invalid_argument("evaluate: test measurements do not match the operator");
  PhaseReconstructor model(checkpoint);
  EvalOptions opts = options;
  if (opts.alpha_key < 0) opts.alpha_key = op.alpha();
  return evaluate([&](const torch::Tensor& y) { return model.reconstruct(y, op); }, test, opts);
}

}  // namespace eipr
