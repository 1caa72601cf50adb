#include "eipr/dataset_archive.hpp"

#include <filesystem>

#include "binary_io.hpp"
#include "eipr/errors.hpp"

namespace eipr {
namespace {

constexpr char kMagic[] = "EIPRDSET";
constexpr uint32_t kVersion = 1;

}  // namespace

std::string archive_filename(int64_t m, int64_t n, uint64_t seed) {
  return "op_m" + std::to_string(m) + "_n" + std::to_string(n) + "_s" + std::to_string(seed) + ".bin";
}

std::string archive_path(const std::string& cache_dir, const std::string& corpus, int64_t m, int64_t n,
                         uint64_t seed) {
  return (std::filesystem::path(cache_dir) / corpus / archive_filename(m, n, seed)).string();
}

void save_dataset(const DatasetArchive& archive, const std::string& path) {
  detail::Container c;
  c.meta = {{"format", "eipr-dataset"},
            {"corpus", archive.corpus},
            {"m", archive.op.m()},
            {"n", archive.op.n()},
            {"seed", archive.op.seed()},
            {"height", archive.op.shape().height},
            {"width", archive.op.shape().width},
            {"count", archive.batch.size()},
            {"has_truths", archive.batch.has_truths()}};
  c.tensors.emplace_back("operator", archive.op.matrix());
  c.tensors.emplace_back("measurements", archive.batch.measurements.to(torch::kDouble));
  if (archive.batch.truths) c.tensors.emplace_back("truths", archive.batch.truths->to(torch::kComplexDouble));
  detail::write_container(path, kMagic, kVersion, c);
}

DatasetArchive load_dataset(const std::string& path) {
  auto c = detail::read_container(path, kMagic, kVersion);
  try {
    const ImageShape shape{c.meta.at("height").get<int64_t>(), c.meta.at("width").get<int64_t>()};
    DatasetArchive archive{c.meta.at("corpus").get<std::string>(),
                           SensingOperator(c.tensor("operator"), shape, c.meta.at("seed").get<uint64_t>()),
                           {c.tensor("measurements"), std::nullopt}};
    if (c.has_tensor("truths")) archive.batch.truths = c.tensor("truths");
    if (archive.batch.measurements.size(1) != archive.op.m())
      throw IoError("dataset '" + path + "' has measurements that do not match its operator");
    return archive;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("dataset '" + path + "' is missing metadata: " + e.what());
  }
}

}  // namespace eipr
