#pragma once

#include <string>

#include <torch/torch.h>

namespace eipr {

/// Reads an unsigned-byte IDX file (plain or gzip-compressed) into a uint8 tensor
/// with the file's dimensions. Throws IoError on malformed input.
torch::Tensor read_idx(const std::string& path);

/// Writes a uint8 tensor as IDX; gzip-compressed when the path ends in ".gz".
void write_idx(const std::string& path, const torch::Tensor& data);

/// MNIST-style image file as float64 [N, H, W] scaled to [0, 1].
torch::Tensor load_idx_images(const std::string& path);

}  // namespace eipr
