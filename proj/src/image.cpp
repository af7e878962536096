#include "acan/image.hpp"

#include <string>

#include "acan/errors.hpp"

namespace acan {

const char* to_string(ImageRange range) {
  return range == ImageRange::kGenerator ? "generator[-1,1]" : "acan[0,1]";
}

ImageBatch::ImageBatch(torch::Tensor pixels, ImageRange range)
    : pixels_(std::move(pixels)), range_(range) {
  if (!pixels_.defined() || pixels_.dim() != 4) {
    throw InputError("image batch must be a 4-d tensor (N x 3 x H x W)");
  }
  if (pixels_.size(1) != 3) {
    throw InputError("image batch must have 3 channels, got " + std::to_string(pixels_.size(1)));
  }
  if (pixels_.size(2) != pixels_.size(3)) {
    throw InputError("images must be square, got " + std::to_string(pixels_.size(2)) + "x" +
                     std::to_string(pixels_.size(3)));
  }
  if (pixels_.numel() == 0) return;
  const double lo = range_ == ImageRange::kGenerator ? -1.0 : 0.0;
  const double hi = 1.0;
  const auto values = pixels_.detach();
  const double mn = values.min().item<double>();
  const double mx = values.max().item<double>();
  if (!(mn >= lo - kRangeTolerance && mx <= hi + kRangeTolerance)) {
    throw InputError(std::string("pixel values [") + std::to_string(mn) + ", " +
                     std::to_string(mx) + "] outside range " + to_string(range_));
  }
}

ImageBatch ImageBatch::item(int64_t i) const {
  return ImageBatch(pixels_.narrow(0, i, 1), range_);
}

ImageBatch ImageBatch::concat(const std::vector<ImageBatch>& parts) {
  if (parts.empty()) throw InputError("cannot concatenate an empty list of batches");
  std::vector<torch::Tensor> tensors;
  for (const auto& p : parts) {
    if (p.range() != parts.front().range()) throw InputError("mixed image ranges in concat");
    tensors.push_back(p.tensor());
  }
  return ImageBatch(torch::cat(tensors, 0), parts.front().range());
}

void require_range(const ImageBatch& batch, ImageRange expected) {
  if (batch.range() != expected) {
    throw InputError(std::string("expected ") + to_string(expected) + " images, got " +
                     to_string(batch.range()));
  }
}

torch::Tensor to_acan_range(const torch::Tensor& generator_pixels) {
  return (generator_pixels + 1.0) * 0.5;
}

torch::Tensor to_generator_range(const torch::Tensor& acan_pixels) {
  return acan_pixels * 2.0 - 1.0;
}

ImageBatch range_bridge(const ImageBatch& generator_images) {
  require_range(generator_images, ImageRange::kGenerator);
  return ImageBatch(to_acan_range(generator_images.tensor()), ImageRange::kAcan);
}

ImageBatch range_bridge_inverse(const ImageBatch& acan_images) {
  require_range(acan_images, ImageRange::kAcan);
  return ImageBatch(to_generator_range(acan_images.tensor()), ImageRange::kGenerator);
}

}  // namespace acan
