#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace acan {

enum class BackbonePreset { kToy, kPaper, kCustom };

const char* to_string(BackbonePreset preset);
BackbonePreset backbone_preset_from_string(const std::string& name);

struct StageConfig {
  int64_t block_count = 1;
  int64_t channels = 16;  // block output width; the bottleneck width is channels / 4
};

/// Shape of the residual backbone.
///
/// The `paper` preset is the 50-layer bottleneck network: stages of 3, 4, 6, 3
/// blocks with 256, 512, 1024, 2048 output channels (16 blocks). The toy preset
/// keeps one block per stage with 16, 32, 64, 128 channels.
struct BackboneConfig {
  std::vector<StageConfig> stages;
  int64_t stem_channels = 16;
  int64_t input_height = 64;
  int64_t input_width = 64;
  BackbonePreset preset = BackbonePreset::kCustom;

  static BackboneConfig toy(int64_t input_size = 64);
  static BackboneConfig paper(int64_t input_size = 256);

  int64_t input_size() const { return input_height; }
  int64_t total_blocks() const;
  /// Dimension of the merged feature, sum over stages of blocks x channels.
  int64_t merged_dim() const;

  /// Throws ConfigError on empty or non-positive stages and on non-square input.
  void validate() const;

  nlohmann::json to_json() const;
  static BackboneConfig from_json(const nlohmann::json& j);

  bool operator==(const BackboneConfig& other) const;
};

/// Standard bottleneck: 1x1 reduce, 3x3 (carries the stride), 1x1 expand, each
/// followed by batch norm; projection shortcut when the shape changes.
class BottleneckImpl : public torch::nn::Module {
 public:
  BottleneckImpl(int64_t in_channels, int64_t out_channels, int64_t stride);

  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
  torch::nn::BatchNorm2d bn1_{nullptr}, bn2_{nullptr}, bn3_{nullptr};
  torch::nn::Sequential shortcut_{nullptr};
};
TORCH_MODULE(Bottleneck);

class ResidualBackboneImpl : public torch::nn::Module {
 public:
  explicit ResidualBackboneImpl(const BackboneConfig& config);

  /// Output of every residual block after its final ReLU, in network order.
  std::vector<torch::Tensor> forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d stem_conv_{nullptr};
  torch::nn::BatchNorm2d stem_bn_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
};
TORCH_MODULE(ResidualBackbone);

}  // namespace acan
