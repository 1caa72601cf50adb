#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "eipr/report.hpp"
#include "eipr/types.hpp"

namespace eipr {

struct ExportOptions {
  int64_t grid_columns = 8;
  int64_t margin = 2;
  int64_t plot_width = 640;
  int64_t plot_height = 480;
};

struct ExportedFiles {
  std::string csv;
  std::string plot;
  std::vector<std::string> grids;
};

/// Writes cs_vs_alpha.csv, cs_vs_alpha.png and one grid_alpha_<a>.png per alpha
/// that has stored reconstructions (rows: truth, supervised, self-supervised,
/// gradient descent; only rows with data are drawn). Throws IoError when the
/// directory cannot be written and std::invalid_argument on an empty report.
ExportedFiles export_report(const EvalReport& report, const std::string& out_dir, const ExportOptions& options = {});

/// Pixel size of a rows x cols grid of tiles separated and framed by `margin`.
ImageShape grid_dimensions(int64_t rows, int64_t cols, ImageShape tile, int64_t margin);

/// Lays out phase images (complex [H, W] each, row-major) into an 8-bit grid;
/// phase in [0, 1] rad maps to [0, 255]. Missing tiles stay black.
torch::Tensor render_phase_grid(const std::vector<std::vector<torch::Tensor>>& rows, ImageShape tile,
                                int64_t margin);

/// 8-bit grayscale [H, W] or RGB [H, W, 3] uint8 tensor to PNG.
void write_png(const std::string& path, const torch::Tensor& pixels);

/// Reads back the PNG header: {height, width}.
ImageShape read_png_shape(const std::string& path);

}  // namespace eipr
