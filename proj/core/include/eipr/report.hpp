#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace eipr {

struct CellStats {
  double mean_cs = 0.0;
  double std_cs = 0.0;  // population standard deviation
  int64_t count = 0;

  bool operator==(const CellStats&) const = default;
};

/// One reconstruction kept for display, phase-aligned to its truth.
struct ImageRecord {
  double alpha = 0.0;
  std::string regime;
  int64_t index = 0;
  double cs = 0.0;
  torch::Tensor truth;    // complex [H, W]
  torch::Tensor aligned;  // complex [H, W]
};

struct CellFailure {
  double alpha = 0.0;
  std::string regime;
  std::string message;
};

/// Aggregate cosine-similarity results keyed by sampling ratio, then regime.
struct EvalReport {
  std::map<double, std::map<std::string, CellStats>> per_alpha;
  std::vector<ImageRecord> per_image;
  std::vector<CellFailure> failures;

  int64_t cell_count() const;
  bool empty() const { return per_alpha.empty(); }
  /// Inserts every cell, image and failure of `other`; cells of `other` win on collision.
  void merge(const EvalReport& other);
  /// Null when the cell is absent.
  const CellStats* find(double alpha, const std::string& regime) const;
};

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// `alpha,regime,mean_cs,std_cs,n` header plus one row per cell. Numbers use the
/// shortest text that parses back to the same double.
std::string report_to_csv(const EvalReport& report);
/// Aggregates only; per-image records and failures are not part of the CSV.
EvalReport report_from_csv(const std::string& text);

}  // namespace eipr
