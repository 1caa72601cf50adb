#pragma once

// Framed binary container shared by checkpoints and dataset archives:
//   8-byte magic | u32 version | u64 header size | JSON header | tensor payloads
// The header lists every tensor as {name, dtype, shape, offset, bytes}; offsets
// are relative to the end of the header. Payloads are raw little-endian.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "json.hpp"

namespace eipr::detail {

struct Container {
  nlohmann::json meta;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;

  const torch::Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void write_container(const std::string& path, const std::string& magic, uint32_t version, const Container& c);
/// Throws IoError when the magic does not match or the version is newer than `max_version`.
Container read_container(const std::string& path, const std::string& magic, uint32_t max_version);

/// Writes to `path + ".tmp"` then renames over `path`.
void atomic_write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace eipr::detail
