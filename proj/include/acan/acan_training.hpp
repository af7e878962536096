#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "acan/acan_model.hpp"
#include "acan/schema.hpp"

namespace acan {

/// Images held in memory with their labels. `images` is N x 3 x H x W in [0,1].
struct LabeledImages {
  torch::Tensor images;
  std::vector<AttributeLabel> labels;

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  LabeledImages subset(const std::vector<int64_t>& indices) const;
};

/// Labels packed as tensors: scalars on the unit scale, one class vector per
/// categorical attribute.
struct LabelTensors {
  torch::Tensor scalars;               // N x 6
  std::vector<torch::Tensor> classes;  // each N, int64
};

/// Validates every label against `schema` (LabelError) and packs it.
LabelTensors pack_labels(const std::vector<AttributeLabel>& labels, const AttributeSchema& schema,
                         torch::Dtype dtype = torch::kFloat32);

/// Supervised objective of the attribute network, itemised per attribute.
struct SupervisedLoss {
  torch::Tensor total;               // scalar, differentiable
  std::vector<torch::Tensor> terms;  // 8 scalars in canonical order

  double total_value() const { return total.item<double>(); }
  std::array<double, AttributeSchema::kAttributeCount> term_values() const;
};

/// Mean squared error on each scalar head against (v-1)/9 plus cross-entropy on
/// each categorical head; the total is the plain sum of the eight terms.
SupervisedLoss acan_supervised_loss(const AttributePrediction& pred, const LabelTensors& labels,
                                    const AttributeSchema& schema);
SupervisedLoss acan_supervised_loss(const AttributePrediction& pred,
                                    const std::vector<AttributeLabel>& labels,
                                    const AttributeSchema& schema);

struct AcanTrainConfig {
  int64_t epochs = 60;
  int64_t batch_size = 16;
  double learning_rate = 2e-3;
  double weight_decay = 0.0;
  bool augment = false;          // random flips and quarter turns, drawn per item from the seed
  bool cosine_schedule = false;  // learning rate follows a half cosine to 0 over `epochs`
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static AcanTrainConfig from_json(const nlohmann::json& j);
};

/// One of the eight flips and quarter turns of a C x H x W (or batched) image; k in [0, 8).
torch::Tensor dihedral(const torch::Tensor& image, int64_t k);

struct EpochRecord {
  int64_t epoch = 0;  // 1-based
  double loss = 0.0;  // mean over minibatches
  std::array<double, AttributeSchema::kAttributeCount> terms{};

  nlohmann::json to_json() const;
};

/// Minibatch Adam on acan_supervised_loss. Batch order of epoch e depends only on
/// (seed, e), which makes resuming from a checkpoint reproduce an uninterrupted run.
class AcanTrainer {
 public:
  AcanTrainer(AcanModel model, AcanTrainConfig config);

  /// Runs one epoch; throws DataError on an empty dataset.
  EpochRecord run_epoch(const LabeledImages& data);

  int64_t epochs_done() const { return epochs_done_; }
  const AcanModel& model() const { return model_; }
  AcanModel& model() { return model_; }
  const AcanTrainConfig& config() const { return config_; }

  TensorMap optimizer_state() const;
  void load_optimizer_state(const TensorMap& state, int64_t epochs_done);

 private:
  AcanModel model_;
  AcanTrainConfig config_;
  std::unique_ptr<torch::optim::Adam> optimizer_;
  int64_t epochs_done_ = 0;
};

struct AcanTrainResult {
  AcanModel model;
  std::vector<EpochRecord> log;
};

/// Builds a model from `backbone` (seeded with config.seed) and trains it for
/// config.epochs epochs.
AcanTrainResult train_acan(const LabeledImages& data, const AcanTrainConfig& config,
                           const BackboneConfig& backbone,
                           const AttributeSchema& schema = AttributeSchema::canonical());

/// Per-attribute evaluation: mean absolute error (1..10 units, predictions clamped)
/// for scalar heads and accuracy for categorical heads.
struct AcanMetrics {
  int64_t count = 0;
  std::array<double, AttributeSchema::kScalarCount> scalar_mae{};
  std::array<double, AttributeSchema::kCategoricalCount> accuracy{};
  double mean_scalar_mae = 0.0;

  nlohmann::json to_json(const AttributeSchema& schema) const;
};

/// Runs in evaluation mode with batches of `batch_size`. Throws DataError when empty.
AcanMetrics evaluate_acan(const AcanModel& model, const LabeledImages& data,
                          int64_t batch_size = 64);

}  // namespace acan
