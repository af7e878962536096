#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "acan/acan_training.hpp"
#include "acan/backbone.hpp"
#include "acan/cyclegan_trainer.hpp"

namespace acan {

/// Everything a training command needs, as one flat JSON document. Keys double as
/// command-line flags (--key value); a flag overrides the file value.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string preset = "toy";  // toy | paper
  int64_t image_size = 64;
  int64_t epochs = 200;
  int64_t batch_size = 32;
  double acan_learning_rate = 2e-3;
  double weight_decay = 0.0;
  bool augment = true;
  bool cosine_schedule = true;
  double gan_learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adversarial_weight = 1.0;
  double cycle_weight = 10.0;
  double identity_weight = 5.0;
  std::map<std::string, double> attribute_weights;  // overrides weights from the target file
  std::string direction = "both";                   // ab | ba | both
  int64_t generator_width = 8;
  int64_t generator_blocks = 2;
  int64_t generator_downsamplings = 2;
  int64_t discriminator_width = 8;
  int64_t discriminator_layers = 3;
  int64_t pool_capacity = 50;
  int64_t grid_every = 5;
  int64_t probe_size = 8;
  std::string dataset;          // label file (train-acan) or unpaired root (train-gan)
  std::string target_path;      // attribute target document (train-gan)
  std::string acan_checkpoint;  // frozen attribute network (train-gan)
  std::string output_dir = "out";

  /// Throws ConfigError on non-positive sizes or epochs, negative weights, unknown
  /// preset or direction.
  void validate() const;

  nlohmann::json to_json() const;
  /// Unknown keys and mistyped values throw ConfigError.
  static RunConfig from_json(const nlohmann::json& j);

  /// Pretty-printed document; parse(dump()) == *this bit for bit.
  std::string dump() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  BackboneConfig backbone() const;
  AcanTrainConfig acan_training() const;
  GanTrainConfig gan_training() const;

  bool operator==(const RunConfig&) const = default;
};

/// Defaults, then the config file (if any), then flag overrides given as text and
/// converted to the type of the key. Throws ConfigError for unknown keys.
RunConfig resolve_run_config(const std::optional<std::string>& path,
                             const std::map<std::string, std::string>& overrides);

}  // namespace acan
