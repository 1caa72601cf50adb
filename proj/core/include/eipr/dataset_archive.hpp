#pragma once

#include <cstdint>
#include <string>

#include "eipr/sensing.hpp"

namespace eipr {

/// One cached (corpus, seed, m, n) dataset: the operator and its measurements.
struct DatasetArchive {
  std::string corpus;
  SensingOperator op;
  MeasurementBatch batch;
};

/// "op_m{m}_n{n}_s{seed}.bin".
std::string archive_filename(int64_t m, int64_t n, uint64_t seed);
/// cache_dir / corpus / archive_filename(...).
std::string archive_path(const std::string& cache_dir, const std::string& corpus, int64_t m, int64_t n,
                         uint64_t seed);

void save_dataset(const DatasetArchive& archive, const std::string& path);
DatasetArchive load_dataset(const std::string& path);

}  // namespace eipr
