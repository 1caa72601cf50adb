#include "eipr/reconstructor.hpp"

namespace eipr {

DoubleConvImpl::DoubleConvImpl(int64_t in_channels, int64_t out_channels) {
  conv1_ = register_module("conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, out_channels, 3).padding(1)));
  conv2_ = register_module("conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(out_channels, out_channels, 3).padding(1)));
}

torch::Tensor DoubleConvImpl::forward(torch::Tensor x) {
  x = torch::relu(conv1_->forward(x));
  return torch::relu(conv2_->forward(x));
}

UNetImpl::UNetImpl(const ReconstructorConfig& config) {
  config.validate();
  std::vector<int64_t> width;
  for (int64_t k = 0; k <= config.scales; ++k) width.push_back(config.base_channels << k);

  down_.push_back(register_module("down0", DoubleConv(config.in_channels, width[0])));
  for (int64_t k = 1; k <= config.scales; ++k)
    down_.push_back(register_module("down" + std::to_string(k), DoubleConv(width[k - 1], width[k])));

  // Decoder modules are stored from the coarsest level upwards.
  for (int64_t k = config.scales; k >= 1; --k) {
    up_.push_back(register_module(
        "up" + std::to_string(k),
        torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(width[k], width[k - 1], 2).stride(2))));
    merge_.push_back(register_module("merge" + std::to_string(k), DoubleConv(2 * width[k - 1], width[k - 1])));
  }
  head_ = register_module("head", torch::nn::Conv2d(torch::nn::Conv2dOptions(width[0], config.out_channels, 1)));
  residual_ = config.in_channels == config.out_channels;
}

torch::Tensor UNetImpl::forward(torch::Tensor x) {
  const auto input = x;
  std::vector<torch::Tensor> skips;
  auto h = down_[0]->forward(x);
  for (size_t k = 1; k < down_.size(); ++k) {
    skips.push_back(h);
    h = down_[k]->forward(torch::max_pool2d(h, 2));
  }
  for (size_t k = 0; k < up_.size(); ++k) {
    h = up_[k]->forward(h);
    h = merge_[k]->forward(torch::cat({skips[skips.size() - 1 - k], h}, 1));
  }
  h = head_->forward(h);
  return residual_ ? h + input : h;
}

}  // namespace eipr
