#include "eipr/group_actions.hpp"

#include <algorithm>
#include <unordered_set>

#include "eipr/errors.hpp"

namespace eipr {
namespace {

int64_t wrap(int64_t v, int64_t mod) {
  const int64_t r = v % mod;
  return r < 0 ? r + mod : r;
}

}  // namespace

ShiftTransform::ShiftTransform(int64_t dr, int64_t dc, ImageShape shape) : shape_(shape) {
  if (shape.height < 1 || shape.width < 1) throw std::invalid_argument("shift grid must be positive");
  dr_ = wrap(dr, shape.height);
  dc_ = wrap(dc, shape.width);
}

ShiftTransform ShiftTransform::compose(const ShiftTransform& other) const {
  if (other.shape_ != shape_) throw ShapeError("cannot compose shifts on different grids");
  return {dr_ + other.dr_, dc_ + other.dc_, shape_};
}

torch::Tensor apply(const ShiftTransform& g, const torch::Tensor& x) {
  check_image_dims(x, g.shape(), "shift");
  if (g.is_identity()) return x;
  return torch::roll(x, {g.dr(), g.dc()}, {-2, -1});
}

ComplexImage apply(const ShiftTransform& g, const ComplexImage& x) {
  if (x.shape() != g.shape()) throw ShapeError("shift built for " + g.shape().str() + ", image is " + x.shape().str());
  return {apply(g, x.values()), x.shape()};
}

ShiftTransform inverse(const ShiftTransform& g) { return {-g.dr(), -g.dc(), g.shape()}; }

std::vector<ShiftTransform> sample_shifts(int64_t count, ImageShape shape, Rng& rng) {
  const int64_t group_size = shape.numel();
  if (count < 1 || count > group_size - 1)
    throw std::invalid_argument("sample_shifts: count must be in [1, " + std::to_string(group_size - 1) +
                                "] on a " + shape.str() + " grid, got " + std::to_string(count));
  // Elements 1..|G|-1 index the non-identity shifts as (k / W, k % W).
  std::uniform_int_distribution<int64_t> pick(1, group_size - 1);
  std::vector<int64_t> chosen;
  chosen.reserve(static_cast<size_t>(count));
  if (2 * count < group_size) {
    std::unordered_set<int64_t> seen;
    while (static_cast<int64_t>(chosen.size()) < count) {
      const auto k = pick(rng);
      if (seen.insert(k).second) chosen.push_back(k);
    }
  } else {
    std::vector<int64_t> all(static_cast<size_t>(group_size - 1));
    for (int64_t k = 1; k < group_size; ++k) all[static_cast<size_t>(k - 1)] = k;
    std::shuffle(all.begin(), all.end(), rng);
    chosen.assign(all.begin(), all.begin() + count);
  }
  std::vector<ShiftTransform> out;
  out.reserve(chosen.size());
  for (const auto k : chosen) out.emplace_back(k / shape.width, k % shape.width, shape);
  return out;
}

torch::Tensor apply_per_image(const std::vector<ShiftTransform>& shifts, const torch::Tensor& images,
                              int64_t per_image) {
  if (images.dim() != 3) throw ShapeError("apply_per_image expects [B, H, W] images");
  if (per_image < 1 || static_cast<int64_t>(shifts.size()) != images.size(0) * per_image)
    throw std::invalid_argument("apply_per_image: need per_image shifts for every image");
  std::vector<torch::Tensor> out;
  out.reserve(shifts.size());
  for (size_t k = 0; k < shifts.size(); ++k)
    out.push_back(apply(shifts[k], images[static_cast<int64_t>(k) / per_image]));
  return torch::stack(out);
}

}  // namespace eipr
