#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "eipr/losses.hpp"
#include "eipr/reconstructor.hpp"
#include "eipr/report.hpp"
#include "eipr/sensing.hpp"
#include "eipr/train_config.hpp"

namespace eipr {

struct StepRecord {
  int64_t step = 0;
  int64_t epoch = 0;
  double loss_total = 0.0;
  double loss_mc = 0.0;
  double loss_ei = 0.0;
};

/// JSON object on one line: {"step":..,"epoch":..,"loss_total":..,"loss_mc":..,"loss_ei":..}.
std::string to_log_line(const StepRecord& record);

struct TrainOptions {
  std::string log_path;        // appended to; empty disables
  std::string checkpoint_dir;  // epoch_XXX.ckpt written after every epoch; empty disables
  std::function<void(const StepRecord&)> on_step;
  std::function<void(int64_t epoch, double mean_loss)> on_epoch;
};

/// Builds the loss closure for a regime. Self-supervised regimes see only
/// measurements; the supervised closure needs truths.
std::function<LossValue(const MeasurementBatch&, const ReconstructorFn&, Rng&)> make_loss(
    const TrainConfig& config, const SensingOperator& op);

/// Adam on the regime's loss for `epochs` passes over `data` in seeded random
/// order. Self-supervised regimes train on a truth-stripped copy of `data`.
/// Throws std::invalid_argument for the supervised regime without truths, or
/// when the operator does not match the data.
ModelCheckpoint train(const TrainConfig& config, const MeasurementBatch& data, const SensingOperator& op,
                      const TrainOptions& options = {});

struct EvalOptions {
  int64_t keep_images = 0;  // first k test images stored phase-aligned
  double alpha_key = -1.0;  // key for stored images; op.alpha() when negative
  std::string regime = "model";
  int64_t batch_size = 50;
};

struct EvalResult {
  CellStats stats;
  std::vector<ImageRecord> images;
};

/// Mean and standard deviation of CS(x_i, f(y_i)) over the split. Zero-norm
/// reconstructions raise DegenerateInputError.
EvalResult evaluate(const ReconstructorFn& f, const MeasurementBatch& test, const EvalOptions& options = {});
/// Loads the network from `checkpoint`; throws std::invalid_argument when its
/// image shape differs from the operator's.
EvalResult evaluate(const ModelCheckpoint& checkpoint, const MeasurementBatch& test, const SensingOperator& op,
                    const EvalOptions& options = {});

}  // namespace eipr
