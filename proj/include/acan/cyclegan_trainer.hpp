#pragma once

#include <cstdint>
#include <memory>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "acan/acan_model.hpp"
#include "acan/checkpoint.hpp"
#include "acan/gan.hpp"
#include "acan/guidance.hpp"

namespace acan {

struct GanTrainConfig {
  GanConfig net;
  GanLossWeights weights;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int64_t pool_capacity = ImagePool::kDefaultCapacity;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static GanTrainConfig from_json(const nlohmann::json& j);
};

/// Frozen attribute network plus the commanded targets.
struct AttributeGuidance {
  const AcanModel* acan = nullptr;
  AttributeTarget target;
  GuidanceDirection direction = GuidanceDirection::kBoth;
};

/// Training state of a CycleGAN: both generator/discriminator pairs, their Adam
/// optimisers and the two fake-image pools.
class CycleGanTrainer {
 public:
  explicit CycleGanTrainer(GanTrainConfig config);

  /// One generator update followed by one discriminator update on pooled fakes.
  /// Inputs are generator-space batches of the configured size. When `guidance` is
  /// set, the attribute losses of the translated images enter the generator objective.
  LossBreakdown step(const ImageBatch& batch_a, const ImageBatch& batch_b,
                     const AttributeGuidance* guidance = nullptr);

  /// A to B when `a_to_b`, else B to A. No gradients recorded.
  ImageBatch translate(const ImageBatch& images, bool a_to_b) const;

  GanPair& nets() { return nets_; }
  const GanPair& nets() const { return nets_; }
  const GanTrainConfig& config() const { return config_; }
  int64_t steps_done() const { return steps_done_; }

  /// Networks, optimiser moments and pools under "gan.", "opt_g.", "opt_d.", "pool_a.",
  /// "pool_b."; counters and RNG states in meta["gan"].
  void store(Checkpoint& ck) const;
  /// Rebuilds a trainer from a checkpoint written by store().
  static CycleGanTrainer restore(const Checkpoint& ck);

  void to(torch::Dtype dtype);

 private:
  GanTrainConfig config_;
  GanPair nets_;
  std::unique_ptr<torch::optim::Adam> opt_g_;
  std::unique_ptr<torch::optim::Adam> opt_d_;
  ImagePool pool_a_;
  ImagePool pool_b_;
  int64_t steps_done_ = 0;
};

/// Attribute-guided step. The attribute network must be frozen (ConfigError otherwise)
/// and is never modified.
LossBreakdown guided_training_step(CycleGanTrainer& state, const ImageBatch& batch_a,
                                   const ImageBatch& batch_b, const AttributeGuidance& guidance);

/// Sum over the enabled directions of attribute_losses() on range-bridged translations.
std::array<torch::Tensor, kAttrCount> directional_attribute_losses(
    const AttributeGuidance& guidance, const torch::Tensor& fake_b, const torch::Tensor& fake_a);

}  // namespace acan
