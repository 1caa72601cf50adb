#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "eipr/reconstructor.hpp"

namespace eipr {

enum class Regime { SsAmplitude, SsIntensity, Supervised };

std::string to_string(Regime regime);
/// Accepts "ss_amplitude", "ss_intensity", "supervised".
Regime parse_regime(const std::string& name);
bool is_self_supervised(Regime regime);

/// Everything that determines a training run. Defaults are the published
/// MNIST experiment settings; `base_channels` is not published and defaults to 32.
struct TrainConfig {
  Regime regime = Regime::SsAmplitude;
  double alpha = 0.5;
  double lambda = 1.0;
  double learning_rate = 5e-5;
  int64_t epochs = 15;
  int64_t batch_size = 5;
  double dataset_fraction = 1.0 / 3.0;
  int64_t shifts_per_image = 2;
  uint64_t seed = 0;
  std::string optimizer = "adam";
  int64_t scales = 4;
  int64_t base_channels = 32;
  /// "sum" or "per_measurement"; see McNormalization.
  std::string mc_normalization = "sum";

  void validate() const;
  ReconstructorConfig model_config(ImageShape shape) const;

  /// One `key = value` line per field, fixed order, round-trip exact.
  std::string to_key_value_text() const;
  /// Sets one field from its textual value. Throws std::invalid_argument for an
  /// unknown key or malformed value.
  void set(const std::string& key, const std::string& value);

  /// Canonical record used as the training manifest.
  std::string manifest() const { return to_key_value_text(); }
  /// 16 hex digits, FNV-1a 64 of manifest().
  std::string digest() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Reads `key = value` lines; blank lines and lines starting with '#' or ';' are
/// skipped, and an INI section header is ignored.
TrainConfig parse_train_config(const std::string& text, TrainConfig base = {});
TrainConfig load_train_config(const std::string& path, TrainConfig base = {});

/// Lowercase hex FNV-1a 64.
std::string fnv1a_hex(const std::string& text);

}  // namespace eipr
