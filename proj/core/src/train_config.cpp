#include "eipr/train_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "binary_io.hpp"

namespace eipr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v))
    throw std::invalid_argument("config key '" + key + "': '" + text + "' is not a number");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw std::invalid_argument("config key '" + key + "': '" + text + "' is not an integer");
  return v;
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::SsAmplitude: return "ss_amplitude";
    case Regime::SsIntensity: return "ss_intensity";
    case Regime::Supervised: return "supervised";
  }
  return "unknown";
}

Regime parse_regime(const std::string& name) {
  if (name == "ss_amplitude") return Regime::SsAmplitude;
  if (name == "ss_intensity") return Regime::SsIntensity;
  if (name == "supervised") return Regime::Supervised;
  throw std::invalid_argument("unknown regime '" + name + "' (expected ss_amplitude, ss_intensity or supervised)");
}

bool is_self_supervised(Regime regime) { return regime != Regime::Supervised; }

void TrainConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(dataset_fraction > 0.0) || dataset_fraction > 1.0) throw std::invalid_argument("dataset_fraction must be in (0, 1]");
  if (shifts_per_image < 1) throw std::invalid_argument("shifts_per_image must be >= 1");
  if (optimizer != "adam") throw std::invalid_argument("only the adam optimizer is supported");
  if (mc_normalization != "sum" && mc_normalization != "per_measurement")
    throw std::invalid_argument("mc_normalization must be 'sum' or 'per_measurement'");
  if (scales < 0 || base_channels < 1) throw std::invalid_argument("invalid network size");
}

ReconstructorConfig TrainConfig::model_config(ImageShape shape) const {
  ReconstructorConfig cfg;
  cfg.scales = scales;
  cfg.base_channels = base_channels;
  cfg.image_height = shape.height;
  cfg.image_width = shape.width;
  return cfg;
}

std::string TrainConfig::to_key_value_text() const {
  std::ostringstream out;
  out << "regime = " << to_string(regime) << '\n'
      << "alpha = " << format_double(alpha) << '\n'
      << "lambda = " << format_double(lambda) << '\n'
      << "learning_rate = " << format_double(learning_rate) << '\n'
      << "epochs = " << epochs << '\n'
      << "batch_size = " << batch_size << '\n'
      << "dataset_fraction = " << format_double(dataset_fraction) << '\n'
      << "shifts_per_image = " << shifts_per_image << '\n'
      << "seed = " << seed << '\n'
      << "optimizer = " << optimizer << '\n'
      << "scales = " << scales << '\n'
      << "base_channels = " << base_channels << '\n'
      << "mc_normalization = " << mc_normalization << '\n';
  return out.str();
}

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = unquote(trim(raw));
  if (key == "regime") regime = parse_regime(value);
  else if (key == "alpha") alpha = parse_double(key, value);
  else if (key == "lambda") lambda = parse_double(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "epochs") epochs = parse_int<int64_t>(key, value);
  else if (key == "batch_size") batch_size = parse_int<int64_t>(key, value);
  else if (key == "dataset_fraction") dataset_fraction = parse_double(key, value);
  else if (key == "shifts_per_image") shifts_per_image = parse_int<int64_t>(key, value);
  else if (key == "seed") seed = parse_int<uint64_t>(key, value);
  else if (key == "optimizer") optimizer = value;
  else if (key == "scales") scales = parse_int<int64_t>(key, value);
  else if (key == "base_channels") base_channels = parse_int<int64_t>(key, value);
  else if (key == "mc_normalization") mc_normalization = value;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string TrainConfig::digest() const { return fnv1a_hex(manifest()); }

TrainConfig parse_train_config(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + " has no '=': " + line);
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

TrainConfig load_train_config(const std::string& path, TrainConfig base) {
  return parse_train_config(detail::read_text(path), std::move(base));
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace eipr
