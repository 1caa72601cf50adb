#include "eipr/reconstructor.hpp"

#include <cmath>

#include <ATen/CPUGeneratorImpl.h>

#include "eipr/errors.hpp"

namespace eipr {
namespace {

int64_t round_up(int64_t v, int64_t multiple) { return (v + multiple - 1) / multiple * multiple; }

// Same bounds as libtorch's default conv initialisation (uniform +-1/sqrt(fan_in)),
// but drawn from a private generator so construction never touches global state.
void initialise(torch::nn::Module& module, uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  torch::NoGradGuard guard;
  for (auto& child : module.modules(/*include_self=*/true)) {
    int64_t fan_in = 0;
    if (auto* conv = child->as<torch::nn::Conv2dImpl>()) {
      fan_in = conv->weight.numel() / conv->weight.size(0);
    } else if (auto* up = child->as<torch::nn::ConvTranspose2dImpl>()) {
      fan_in = up->weight.numel() / up->weight.size(0);
    } else {
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& p : child->parameters(/*recurse=*/false)) {
      auto draw = torch::rand(p.sizes(), gen, torch::TensorOptions().dtype(p.scalar_type()));
      p.copy_(draw * (2.0 * bound) - bound);
    }
  }
}

}  // namespace

ImageShape ReconstructorConfig::padded_shape() const {
  const int64_t multiple = int64_t{1} << scales;
  return {round_up(image_height, multiple), round_up(image_width, multiple)};
}

void ReconstructorConfig::validate() const {
  if (scales < 0 || scales > 8) throw std::invalid_argument("reconstructor scales must be in [0, 8]");
  if (base_channels < 1 || in_channels < 1 || out_channels < 1)
    throw std::invalid_argument("reconstructor channel counts must be positive");
  if (image_height < 1 || image_width < 1) throw std::invalid_argument("reconstructor image shape must be positive");
  if (in_channels != 2 || out_channels != 2)
    throw std::invalid_argument("complex images travel as exactly two real channels");
}

torch::Tensor backproject(const torch::Tensor& y, const SensingOperator& op) {
  if (y.dim() < 1 || y.size(-1) != op.m())
    throw ShapeError("backproject expects trailing dim " + std::to_string(op.m()) + ", got " + c10::str(y.sizes()));
  auto amplitude = torch::sqrt(y.clamp_min(0.0));
  return op.adjoint(amplitude);
}

ComplexImage backproject_image(const torch::Tensor& y, const SensingOperator& op) {
  if (y.dim() != 1) throw ShapeError("backproject_image expects a single m-vector");
  return {backproject(y, op), op.shape()};
}

bool ModelCheckpoint::bitwise_equal(const ModelCheckpoint& other) const {
  if (!(config == other.config) || manifest != other.manifest || manifest_digest != other.manifest_digest ||
      epoch != other.epoch || parameters.size() != other.parameters.size())
    return false;
  for (size_t i = 0; i < parameters.size(); ++i) {
    const auto& [name, t] = parameters[i];
    const auto& [other_name, u] = other.parameters[i];
    if (name != other_name || t.sizes() != u.sizes() || t.scalar_type() != u.scalar_type() || !torch::equal(t, u))
      return false;
  }
  return true;
}

PhaseReconstructor::PhaseReconstructor(const ReconstructorConfig& config, uint64_t seed) : config_(config) {
  config_.validate();
  net_ = UNet(config_);
  initialise(*net_, seed);
}

PhaseReconstructor::PhaseReconstructor(const ModelCheckpoint& checkpoint) : config_(checkpoint.config) {
  config_.validate();
  net_ = UNet(config_);
  auto named = net_->named_parameters();
  if (named.size() != checkpoint.parameters.size())
    throw std::invalid_argument("checkpoint has " + std::to_string(checkpoint.parameters.size()) +
                                " tensors, network expects " + std::to_string(named.size()));
  torch::NoGradGuard guard;
  for (const auto& [name, value] : checkpoint.parameters) {
    auto* target = named.find(name);
    if (target == nullptr) throw std::invalid_argument("checkpoint tensor '" + name + "' has no matching parameter");
    if (target->sizes() != value.sizes())
      throw std::invalid_argument("checkpoint tensor '" + name + "' has shape " + c10::str(value.sizes()));
    target->copy_(value);
  }
}

void PhaseReconstructor::check_operator(const SensingOperator& op) const {
  if (op.shape() != config_.image_shape())
    throw std::invalid_argument("model expects " + config_.image_shape().str() + " images, operator produces " +
                                op.shape().str());
}

torch::Tensor PhaseReconstructor::refine(const torch::Tensor& backprojection) const {
  check_image_dims(backprojection, config_.image_shape(), "refine");
  const auto dtype = net_->parameters().front().scalar_type();
  auto x = backprojection.dim() == 2 ? backprojection.unsqueeze(0) : backprojection;
  auto planes = torch::stack({torch::real(x), torch::imag(x)}, 1).to(dtype);

  // Zero-pad to a multiple of 2^scales, centred, then crop back.
  const auto padded = config_.padded_shape();
  const int64_t top = (padded.height - config_.image_height) / 2;
  const int64_t left = (padded.width - config_.image_width) / 2;
  const int64_t bottom = padded.height - config_.image_height - top;
  const int64_t right = padded.width - config_.image_width - left;
  if (top || left || bottom || right) planes = torch::constant_pad_nd(planes, {left, right, top, bottom});

  auto out = net_->forward(planes);
  out = out.slice(2, top, top + config_.image_height).slice(3, left, left + config_.image_width);
  auto image = torch::complex(out.select(1, 0), out.select(1, 1));
  return backprojection.dim() == 2 ? image.squeeze(0) : image;
}

torch::Tensor PhaseReconstructor::reconstruct(const torch::Tensor& y, const SensingOperator& op) const {
  check_operator(op);
  const auto dtype = net_->parameters().front().scalar_type();
  return refine(backproject(y.to(dtype), op));
}

ComplexImage PhaseReconstructor::reconstruct_image(const torch::Tensor& y, const SensingOperator& op) const {
  if (y.dim() != 1) throw ShapeError("reconstruct_image expects a single m-vector");
  return {reconstruct(y, op), op.shape()};
}

std::vector<torch::Tensor> PhaseReconstructor::parameters() const { return net_->parameters(); }

int64_t PhaseReconstructor::parameter_count() const {
  int64_t total = 0;
  for (const auto& p : net_->parameters()) total += p.numel();
  return total;
}

void PhaseReconstructor::to(torch::ScalarType dtype) { net_->to(dtype); }

ModelCheckpoint PhaseReconstructor::checkpoint(std::string manifest, std::string digest, int64_t epoch) const {
  ModelCheckpoint ckpt{config_, std::move(manifest), std::move(digest), epoch, {}};
  for (const auto& item : net_->named_parameters())
    ckpt.parameters.emplace_back(item.key(), item.value().detach().to(torch::kFloat).clone());
  return ckpt;
}

}  // namespace eipr
