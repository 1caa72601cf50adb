#include "binary_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eipr/errors.hpp"

namespace eipr::detail {
namespace {

static_assert(std::endian::native == std::endian::little, "archives are written little-endian");

std::string dtype_tag(torch::ScalarType t) {
  switch (t) {
    case torch::kUInt8: return "u8";
    case torch::kInt64: return "i64";
    case torch::kFloat: return "f32";
    case torch::kDouble: return "f64";
    case torch::kComplexFloat: return "c64";
    case torch::kComplexDouble: return "c128";
    default: throw IoError("unsupported tensor dtype in archive");
  }
}

torch::ScalarType dtype_from_tag(const std::string& tag) {
  if (tag == "u8") return torch::kUInt8;
  if (tag == "i64") return torch::kInt64;
  if (tag == "f32") return torch::kFloat;
  if (tag == "f64") return torch::kDouble;
  if (tag == "c64") return torch::kComplexFloat;
  if (tag == "c128") return torch::kComplexDouble;
  throw IoError("unknown tensor dtype tag '" + tag + "'");
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated archive header");
  return value;
}

}  // namespace

const torch::Tensor& Container::tensor(const std::string& name) const {
  for (const auto& [key, t] : tensors)
    if (key == name) return t;
  throw IoError("archive has no tensor '" + name + "'");
}

bool Container::has_tensor(const std::string& name) const {
  for (const auto& entry : tensors)
    if (entry.first == name) return true;
  return false;
}

void write_container(const std::string& path, const std::string& magic, uint32_t version, const Container& c) {
  nlohmann::json header = c.meta;
  header["tensors"] = nlohmann::json::array();
  std::vector<torch::Tensor> payloads;
  uint64_t offset = 0;
  for (const auto& [name, t] : c.tensors) {
    auto dense = t.detach().contiguous().cpu();
    const auto bytes = static_cast<uint64_t>(dense.numel() * dense.element_size());
    header["tensors"].push_back({{"name", name},
                                 {"dtype", dtype_tag(dense.scalar_type())},
                                 {"shape", dense.sizes().vec()},
                                 {"offset", offset},
                                 {"bytes", bytes}});
    offset += bytes;
    payloads.push_back(std::move(dense));
  }
  const std::string text = header.dump();

  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    if (magic.size() != 8) throw std::logic_error("archive magic must be 8 bytes");
    out.write(magic.data(), 8);
    put<uint32_t>(out, version);
    put<uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : payloads)
      out.write(static_cast<const char*>(t.data_ptr()), t.numel() * t.element_size());
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

Container read_container(const std::string& path, const std::string& magic, uint32_t max_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string found(8, '\0');
  in.read(found.data(), 8);
  if (!in || found != magic) throw IoError("'" + path + "' is not a " + magic + " archive");
  const auto version = get<uint32_t>(in);
  if (version == 0 || version > max_version)
    throw IoError("'" + path + "' has unsupported format version " + std::to_string(version));
  const auto header_size = get<uint64_t>(in);
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw IoError("truncated archive header in '" + path + "'");

  Container c;
  try {
    c.meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt archive header in '" + path + "': " + e.what());
  }
  const auto payload_start = in.tellg();
  for (const auto& entry : c.meta.at("tensors")) {
    const auto shape = entry.at("shape").get<std::vector<int64_t>>();
    auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from_tag(entry.at("dtype"))));
    const auto bytes = entry.at("bytes").get<uint64_t>();
    if (bytes != static_cast<uint64_t>(t.numel() * t.element_size()))
      throw IoError("tensor size mismatch in '" + path + "'");
    in.seekg(payload_start + static_cast<std::streamoff>(entry.at("offset").get<uint64_t>()));
    in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("truncated tensor payload in '" + path + "'");
    c.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  c.meta.erase("tensors");
  return c;
}

void atomic_write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace eipr::detail
