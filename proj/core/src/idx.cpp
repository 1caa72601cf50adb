#include "eipr/idx.hpp"

#include <memory>
#include <vector>

#include <zlib.h>

#include "eipr/errors.hpp"

namespace eipr {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// gzread handles both compressed and plain files transparently.
struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

void read_exact(gzFile f, void* dst, size_t bytes, const std::string& path) {
  auto* out = static_cast<char*>(dst);
  while (bytes > 0) {
    const auto chunk = static_cast<unsigned>(std::min<size_t>(bytes, 1u << 30));
    const int got = gzread(f, out, chunk);
    if (got <= 0) throw IoError("truncated IDX file '" + path + "'");
    out += got;
    bytes -= static_cast<size_t>(got);
  }
}

uint32_t big_endian(const unsigned char* p) {
  return (uint32_t{p[0]} << 24) | (uint32_t{p[1]} << 16) | (uint32_t{p[2]} << 8) | uint32_t{p[3]};
}

}  // namespace

torch::Tensor read_idx(const std::string& path) {
  GzHandle f(gzopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open IDX file '" + path + "'");
  unsigned char magic[4];
  read_exact(f.get(), magic, 4, path);
  if (magic[0] != 0 || magic[1] != 0) throw IoError("'" + path + "' is not an IDX file");
  if (magic[2] != 0x08) throw IoError("'" + path + "' is not an unsigned-byte IDX file");
  const int rank = magic[3];
  if (rank < 1 || rank > 4) throw IoError("'" + path + "' has unsupported IDX rank " + std::to_string(rank));
  std::vector<int64_t> dims;
  int64_t total = 1;
  for (int k = 0; k < rank; ++k) {
    unsigned char raw[4];
    read_exact(f.get(), raw, 4, path);
    dims.push_back(big_endian(raw));
    total *= dims.back();
  }
  auto data = torch::empty(dims, torch::kUInt8);
  read_exact(f.get(), data.data_ptr(), static_cast<size_t>(total), path);
  return data;
}

void write_idx(const std::string& path, const torch::Tensor& data) {
  if (data.scalar_type() != torch::kUInt8 || data.dim() < 1 || data.dim() > 4)
    throw std::invalid_argument("write_idx expects a uint8 tensor of rank 1-4");
  auto dense = data.contiguous();
  std::vector<unsigned char> header = {0, 0, 0x08, static_cast<unsigned char>(dense.dim())};
  for (auto d : dense.sizes())
    for (int shift = 24; shift >= 0; shift -= 8) header.push_back(static_cast<unsigned char>((d >> shift) & 0xff));
  GzHandle f(gzopen(path.c_str(), ends_with(path, ".gz") ? "wb9" : "wbT"));
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  const auto bytes = static_cast<unsigned>(dense.numel());
  if (gzwrite(f.get(), header.data(), static_cast<unsigned>(header.size())) != static_cast<int>(header.size()) ||
      (bytes > 0 && gzwrite(f.get(), dense.data_ptr(), bytes) != static_cast<int>(bytes)))
    throw IoError("write to '" + path + "' failed");
}

torch::Tensor load_idx_images(const std::string& path) {
  auto raw = read_idx(path);
  if (raw.dim() != 3) throw IoError("'" + path + "' does not hold an [N, H, W] image stack");
  return raw.to(torch::kDouble) / 255.0;
}

}  // namespace eipr
