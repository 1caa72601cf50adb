#include "binary_io.hpp"
#include "eipr/errors.hpp"
#include "eipr/reconstructor.hpp"

namespace eipr {
namespace {

constexpr char kMagic[] = "EIPRCKPT";
constexpr uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::string& path) {
  detail::Container c;
  const auto& cfg = checkpoint.config;
  c.meta = {{"format", "eipr-checkpoint"},
            {"config",
             {{"scales", cfg.scales},
              {"base_channels", cfg.base_channels},
              {"in_channels", cfg.in_channels},
              {"out_channels", cfg.out_channels},
              {"image_height", cfg.image_height},
              {"image_width", cfg.image_width}}},
            {"manifest", checkpoint.manifest},
            {"manifest_digest", checkpoint.manifest_digest},
            {"epoch", checkpoint.epoch}};
  c.tensors = checkpoint.parameters;
  detail::write_container(path, kMagic, kVersion, c);
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  auto c = detail::read_container(path, kMagic, kVersion);
  try {
    ModelCheckpoint ckpt;
    const auto& cfg = c.meta.at("config");
    ckpt.config.scales = cfg.at("scales");
    ckpt.config.base_channels = cfg.at("base_channels");
    ckpt.config.in_channels = cfg.at("in_channels");
    ckpt.config.out_channels = cfg.at("out_channels");
    ckpt.config.image_height = cfg.at("image_height");
    ckpt.config.image_width = cfg.at("image_width");
    ckpt.manifest = c.meta.at("manifest");
    ckpt.manifest_digest = c.meta.at("manifest_digest");
    ckpt.epoch = c.meta.at("epoch");
    ckpt.parameters = std::move(c.tensors);
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint '" + path + "' is missing metadata: " + e.what());
  }
}

}  // namespace eipr
