#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "acan/image.hpp"
#include "acan/random.hpp"
#include "acan/tensor_util.hpp"

namespace acan {

/// Widths of the translation networks. Defaults are desk-scale; the reference
/// CycleGAN uses 64 filters, 9 residual blocks and a 3-layer 70x70 PatchGAN.
struct GanConfig {
  int64_t image_size = 64;
  int64_t generator_width = 8;
  int64_t generator_blocks = 2;
  int64_t generator_downsamplings = 2;
  int64_t discriminator_width = 8;
  int64_t discriminator_layers = 3;

  void validate() const;
  nlohmann::json to_json() const;
  static GanConfig from_json(const nlohmann::json& j);
  bool operator==(const GanConfig&) const = default;
};

class ResnetBlockImpl : public torch::nn::Module {
 public:
  explicit ResnetBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResnetBlock);

/// Encoder, residual transformer and decoder ending in tanh, so outputs stay in (-1, 1).
class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(const GanConfig& config);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(Generator);

/// PatchGAN: one real-valued score per receptive-field patch.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(const GanConfig& config);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(Discriminator);

/// Both translation directions and their critics.
struct GanPair {
  GanConfig config;
  Generator g_ab{nullptr};
  Generator g_ba{nullptr};
  Discriminator d_a{nullptr};  // judges domain A images
  Discriminator d_b{nullptr};  // judges domain B images

  GanPair(const GanConfig& config, std::uint64_t seed);

  std::vector<torch::Tensor> generator_parameters() const;
  std::vector<torch::Tensor> discriminator_parameters() const;

  TensorMap state() const;
  void load_state(const TensorMap& state);
  void to(torch::Dtype dtype);
};

/// Runs `g` on a generator-space batch. Throws InputError on a range mismatch.
ImageBatch generator_forward(Generator& g, const ImageBatch& images);

/// Least-squares GAN objective, mean((d_out - t)^2) with t = 1 (real) or 0 (fake).
/// Throws NumericError on non-finite input.
torch::Tensor adversarial_loss(const torch::Tensor& d_out, bool target_is_real);

/// Mean absolute difference. Throws InputError on a shape mismatch.
torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_rec);
torch::Tensor identity_loss(const torch::Tensor& y, const torch::Tensor& g_of_y);

/// History buffer of generated images for discriminator updates.
///
/// Fills up to capacity first (returning the fresh images); afterwards each item is,
/// with probability 0.5, swapped for a uniformly chosen stored image.
class ImagePool {
 public:
  static constexpr int64_t kDefaultCapacity = 50;

  explicit ImagePool(int64_t capacity = kDefaultCapacity, std::uint64_t seed = 0);

  /// `fresh` is N x C x H x W; returns a batch of the same shape (detached).
  torch::Tensor query(const torch::Tensor& fresh);

  int64_t capacity() const { return capacity_; }
  int64_t size() const { return static_cast<int64_t>(images_.size()); }

  /// Stored images under "<prefix>images" plus RNG state text.
  TensorMap state(const std::string& prefix) const;
  std::string rng_state() const { return rng_.serialize(); }
  void restore(const TensorMap& state, const std::string& prefix, const std::string& rng_state);

 private:
  int64_t capacity_;
  std::vector<torch::Tensor> images_;
  Rng rng_;
};

}  // namespace acan
