#include "eipr/export.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <set>

#include <png.h>

#include "binary_io.hpp"
#include "eipr/errors.hpp"

namespace eipr {
namespace {

namespace fs = std::filesystem;
using Rgb = std::array<uint8_t, 3>;

// Row order of reconstruction grids; regimes absent from the report are skipped.
const std::array<const char*, 4> kGridRows = {"supervised", "ss_amplitude", "ss_intensity", "gd"};

Rgb regime_colour(const std::string& regime) {
  if (regime == "supervised") return {31, 119, 180};
  if (regime == "ss_amplitude") return {214, 39, 40};
  if (regime == "ss_intensity") return {44, 160, 44};
  if (regime == "gd") return {148, 103, 189};
  return {90, 90, 90};
}

std::string alpha_label(double alpha) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), alpha);
  return std::string(buf, end);
}

class Canvas {
 public:
  Canvas(int64_t h, int64_t w) : pixels_(torch::full({h, w, 3}, 255, torch::kUInt8)), h_(h), w_(w) {}

  void dot(int64_t x, int64_t y, Rgb c, int64_t radius) {
    auto acc = pixels_.accessor<uint8_t, 3>();
    for (int64_t dy = -radius; dy <= radius; ++dy)
      for (int64_t dx = -radius; dx <= radius; ++dx) {
        const auto px = x + dx;
        const auto py = y + dy;
        if (px < 0 || py < 0 || px >= w_ || py >= h_) continue;
        for (int k = 0; k < 3; ++k) acc[py][px][k] = c[static_cast<size_t>(k)];
      }
  }

  void line(int64_t x0, int64_t y0, int64_t x1, int64_t y1, Rgb c, int64_t radius = 1) {
    const int64_t dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int64_t dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int64_t err = dx + dy;
    while (true) {
      dot(x0, y0, c, radius);
      if (x0 == x1 && y0 == y1) break;
      const auto e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }

  const torch::Tensor& pixels() const { return pixels_; }

 private:
  torch::Tensor pixels_;
  int64_t h_;
  int64_t w_;
};

torch::Tensor render_plot(const EvalReport& report, const ExportOptions& o) {
  Canvas canvas(o.plot_height, o.plot_width);
  const int64_t left = 50, right = o.plot_width - 20, top = 20, bottom = o.plot_height - 40;
  const double a_min = report.per_alpha.begin()->first;
  const double a_max = report.per_alpha.rbegin()->first;
  const double span = a_max > a_min ? a_max - a_min : 1.0;
  auto px = [&](double a) { return left + static_cast<int64_t>(std::lround((a - a_min) / span * (right - left))); };
  auto py = [&](double cs) {
    return bottom - static_cast<int64_t>(std::lround(std::clamp(cs, 0.0, 1.0) * (bottom - top)));
  };

  for (int k = 0; k <= 4; ++k) canvas.line(left, py(k / 4.0), right, py(k / 4.0), {225, 225, 225}, 0);
  for (const auto& [alpha, row] : report.per_alpha) canvas.line(px(alpha), bottom, px(alpha), bottom + 6, {0, 0, 0}, 0);
  canvas.line(left, bottom, right, bottom, {0, 0, 0}, 0);
  canvas.line(left, top, left, bottom, {0, 0, 0}, 0);

  std::set<std::string> regimes;
  for (const auto& [alpha, row] : report.per_alpha)
    for (const auto& [regime, stats] : row) regimes.insert(regime);
  int64_t legend = 0;
  for (const auto& regime : regimes) {
    const auto colour = regime_colour(regime);
    std::optional<std::pair<int64_t, int64_t>> prev;
    for (const auto& [alpha, row] : report.per_alpha) {
      auto it = row.find(regime);
      if (it == row.end()) continue;
      const std::pair<int64_t, int64_t> p{px(alpha), py(it->second.mean_cs)};
      if (prev) canvas.line(prev->first, prev->second, p.first, p.second, colour, 1);
      canvas.dot(p.first, p.second, colour, 3);
      prev = p;
    }
    // Legend swatches in regime-name order along the top-left corner.
    canvas.dot(left + 12 + 16 * legend, top + 8, colour, 5);
    ++legend;
  }
  return canvas.pixels();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
}

}  // namespace

ImageShape grid_dimensions(int64_t rows, int64_t cols, ImageShape tile, int64_t margin) {
  return {rows * tile.height + (rows + 1) * margin, cols * tile.width + (cols + 1) * margin};
}

torch::Tensor render_phase_grid(const std::vector<std::vector<torch::Tensor>>& rows, ImageShape tile, int64_t margin) {
  int64_t cols = 0;
  for (const auto& r : rows) cols = std::max<int64_t>(cols, static_cast<int64_t>(r.size()));
  const auto dims = grid_dimensions(static_cast<int64_t>(rows.size()), cols, tile, margin);
  auto grid = torch::zeros({dims.height, dims.width}, torch::kUInt8);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      const auto& img = rows[r][c];
      if (!img.defined()) continue;
      check_image_dims(img, tile, "grid tile");
      auto phase = torch::angle(img.to(torch::kComplexDouble)).clamp(0.0, 1.0);
      auto tile_px = (phase * 255.0).round().to(torch::kUInt8);
      const auto y0 = margin + static_cast<int64_t>(r) * (tile.height + margin);
      const auto x0 = margin + static_cast<int64_t>(c) * (tile.width + margin);
      grid.slice(0, y0, y0 + tile.height).slice(1, x0, x0 + tile.width).copy_(tile_px);
    }
  }
  return grid;
}

void write_png(const std::string& path, const torch::Tensor& pixels) {
  if (pixels.scalar_type() != torch::kUInt8 || (pixels.dim() != 2 && !(pixels.dim() == 3 && pixels.size(2) == 3)))
    throw std::invalid_argument("write_png expects uint8 [H, W] or [H, W, 3]");
  auto data = pixels.contiguous();
  const auto h = data.size(0);
  const auto w = data.size(1);
  const int channels = data.dim() == 2 ? 1 : 3;

  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing '" + path + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  auto* base = data.data_ptr<uint8_t>();
  for (int64_t r = 0; r < h; ++r) png_write_row(png, base + r * w * channels);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageShape read_png_shape(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw IoError("cannot open '" + path + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path + "' is not a readable PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  ImageShape shape{static_cast<int64_t>(png_get_image_height(png, info)),
                   static_cast<int64_t>(png_get_image_width(png, info))};
  png_destroy_read_struct(&png, &info, nullptr);
  return shape;
}

ExportedFiles export_report(const EvalReport& report, const std::string& out_dir, const ExportOptions& options) {
  if (report.empty()) throw std::invalid_argument("export: report has no cells");
  ensure_dir(out_dir);
  ExportedFiles files;
  files.csv = (fs::path(out_dir) / "cs_vs_alpha.csv").string();
  detail::atomic_write_text(files.csv, report_to_csv(report));
  files.plot = (fs::path(out_dir) / "cs_vs_alpha.png").string();
  write_png(files.plot, render_plot(report, options));

  // alpha -> regime -> index -> aligned reconstruction, plus truths by index.
  std::map<double, std::map<std::string, std::map<int64_t, torch::Tensor>>> recon;
  std::map<double, std::map<int64_t, torch::Tensor>> truths;
  for (const auto& r : report.per_image) {
    recon[r.alpha][r.regime][r.index] = r.aligned;
    truths[r.alpha][r.index] = r.truth;
  }
  for (const auto& [alpha, by_regime] : recon) {
    std::vector<int64_t> columns;
    for (const auto& [index, t] : truths[alpha]) {
      if (static_cast<int64_t>(columns.size()) >= options.grid_columns) break;
      columns.push_back(index);
    }
    const auto& first = truths[alpha].begin()->second;
    const ImageShape tile{first.size(0), first.size(1)};
    std::vector<std::vector<torch::Tensor>> rows;
    auto make_row = [&](const std::map<int64_t, torch::Tensor>& source) {
      std::vector<torch::Tensor> row;
      for (auto index : columns) {
        auto it = source.find(index);
        row.push_back(it == source.end() ? torch::Tensor() : it->second);
      }
      return row;
    };
    rows.push_back(make_row(truths[alpha]));
    for (const char* regime : kGridRows)
      if (auto it = by_regime.find(regime); it != by_regime.end()) rows.push_back(make_row(it->second));
    const auto path = (fs::path(out_dir) / ("grid_alpha_" + alpha_label(alpha) + ".png")).string();
    write_png(path, render_phase_grid(rows, tile, options.margin));
    files.grids.push_back(path);
  }
  return files;
}

}  // namespace eipr
