#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "acan/backbone.hpp"
#include "acan/image.hpp"
#include "acan/schema.hpp"
#include "acan/tensor_util.hpp"

namespace acan {

/// L2-normalised concatenation of per-block GAP vectors, N x D.
struct MergedFeature {
  torch::Tensor vector;
};

/// Outputs of the eight attribute heads for a batch.
struct AttributePrediction {
  torch::Tensor scalars;                       // N x 6, model space (0..1 maps to 1..10)
  std::vector<torch::Tensor> class_log_probs;  // one N x C tensor per categorical attribute

  int64_t batch_size() const { return scalars.size(0); }
  torch::Tensor class_probs(std::size_t k) const { return class_log_probs.at(k).exp(); }

  /// Scalar head `slot` of item `i` on the 1..10 scale (clamped).
  double rating(int64_t i, std::size_t slot) const;
  /// argmax of categorical head `k` for item `i`.
  int64_t predicted_class(int64_t i, std::size_t k) const;

  /// Build from probabilities directly (used by tests and tools).
  static AttributePrediction from_probabilities(torch::Tensor scalars,
                                                const std::vector<torch::Tensor>& probs);
};

/// Spatial mean of each map, concatenated in order (before normalisation).
torch::Tensor gap_concat(const std::vector<torch::Tensor>& maps);

/// GAP, concatenation and per-sample L2 normalisation (epsilon 1e-12).
MergedFeature gap_merge(const std::vector<torch::Tensor>& maps);

inline constexpr double kMergeEpsilon = 1e-12;

class AcanNetImpl : public torch::nn::Module {
 public:
  AcanNetImpl(const BackboneConfig& config, const AttributeSchema& schema);

  ResidualBackbone backbone{nullptr};
  torch::nn::ModuleList heads{nullptr};  // one affine head per attribute, canonical order
};
TORCH_MODULE(AcanNet);

/// The art composition attribute network: residual backbone, GAP merge layer and one
/// affine head per attribute attached directly to the merge layer.
///
/// Copies share parameters (libtorch module semantics); use clone() for a deep copy.
/// Constructed in evaluation mode. Inference on a shared model is thread-safe as long
/// as nobody trains it concurrently.
class AcanModel {
 public:
  /// Throws ConfigError when `config` is invalid.
  AcanModel(BackboneConfig config, AttributeSchema schema, std::uint64_t seed);

  const BackboneConfig& config() const { return config_; }
  const AttributeSchema& schema() const { return schema_; }
  int64_t merged_dim() const { return config_.merged_dim(); }

  /// Rectified output of every residual block. Images must be [0,1] and match the
  /// configured input size; throws InputError otherwise.
  std::vector<torch::Tensor> extract_block_features(const ImageBatch& images) const;

  AttributePrediction predict(const ImageBatch& images) const;
  AttributePrediction predict_from_merged(const MergedFeature& merged) const;

  /// Disable gradients on every parameter and switch to evaluation mode.
  void freeze();
  bool frozen() const { return frozen_; }

  void set_training(bool training);
  bool is_training() const { return net_->is_training(); }

  /// Hook for externally pretrained backbone weights. Names are relative to the
  /// backbone ("stem_conv.weight", "blocks.0.conv1.weight", ...). Every tensor must
  /// exist and match in shape; unknown names throw ConfigError.
  void load_backbone_weights(const TensorMap& weights);

  void to(torch::Dtype dtype);
  torch::Dtype dtype() const;

  std::vector<torch::Tensor> parameters() const { return net_->parameters(); }
  TensorMap state() const { return named_state(*net_); }
  void load_state(const TensorMap& state) { load_named_state(*net_, state); }
  std::uint64_t digest() const { return state_digest(*net_); }

  AcanModel clone() const;

 private:
  BackboneConfig config_;
  AttributeSchema schema_;
  AcanNet net_{nullptr};
  bool frozen_ = false;
};

inline AcanModel build_acan(const BackboneConfig& config, const AttributeSchema& schema,
                            std::uint64_t seed) {
  return AcanModel(config, schema, seed);
}

inline std::vector<torch::Tensor> extract_block_features(const AcanModel& model,
                                                         const ImageBatch& images) {
  return model.extract_block_features(images);
}

inline AttributePrediction predict_attributes(const AcanModel& model, const ImageBatch& images) {
  return model.predict(images);
}

}  // namespace acan
