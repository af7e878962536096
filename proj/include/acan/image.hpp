#pragma once

#include <torch/torch.h>

namespace acan {

/// Value range an image batch is expressed in.
enum class ImageRange {
  kGenerator,  // [-1, 1], what generators consume and emit
  kAcan,       // [0, 1], what the attribute network consumes
};

const char* to_string(ImageRange range);

/// Square RGB image batch, stored N x 3 x H x W (channels-first, libtorch layout).
///
/// Construction checks rank, channel count, squareness and that every value lies
/// within the tagged range (tolerance 1e-6). The tensor may require grad.
class ImageBatch {
 public:
  static constexpr double kRangeTolerance = 1e-6;

  ImageBatch(torch::Tensor pixels, ImageRange range);

  const torch::Tensor& tensor() const { return pixels_; }
  ImageRange range() const { return range_; }
  int64_t batch_size() const { return pixels_.size(0); }
  int64_t image_size() const { return pixels_.size(2); }

  /// Item `i` as a batch of one.
  ImageBatch item(int64_t i) const;

  static ImageBatch concat(const std::vector<ImageBatch>& parts);

 private:
  torch::Tensor pixels_;
  ImageRange range_;
};

/// Throws InputError unless `batch` is tagged with `expected`.
void require_range(const ImageBatch& batch, ImageRange expected);

/// (x + 1) / 2 on a raw tensor. Differentiable.
torch::Tensor to_acan_range(const torch::Tensor& generator_pixels);
/// 2x - 1 on a raw tensor.
torch::Tensor to_generator_range(const torch::Tensor& acan_pixels);

/// Generator-space batch mapped into the attribute network's [0,1] space.
ImageBatch range_bridge(const ImageBatch& generator_images);
/// Inverse of range_bridge.
ImageBatch range_bridge_inverse(const ImageBatch& acan_images);

}  // namespace acan
