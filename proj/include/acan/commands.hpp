#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "acan/acan_training.hpp"
#include "acan/cyclegan_trainer.hpp"
#include "acan/run_config.hpp"

namespace acan {

namespace fs = std::filesystem;

// File names written into a run's output directory.
inline constexpr const char* kAcanCheckpoint = "acan.ckpt";
inline constexpr const char* kAcanLog = "acan_log.jsonl";
inline constexpr const char* kGanCheckpoint = "gan.ckpt";
inline constexpr const char* kGanLog = "gan_log.jsonl";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kLabelFile = "labels.csv";

struct MakeSyntheticOptions {
  int64_t count = 500;
  std::uint64_t seed = 7;
  fs::path out_dir;
  int64_t canvas = 64;
  bool unpaired = false;  // trainA/trainB/testA/testB instead of a labelled corpus
  int64_t test_count = 8;  // per domain, unpaired only
};

/// Labelled corpus: <out>/NNNNN.png plus <out>/labels.csv. Unpaired: red-circle and
/// orange-circle domains under trainA, trainB, testA, testB.
void cmd_make_synthetic(const MakeSyntheticOptions& options);

struct TrainAcanOptions {
  bool resume = false;     // continue from <output_dir>/acan.ckpt
  int64_t stop_after = 0;  // stop once this many epochs are done (0 = run to the end)
};

/// Trains the attribute network on the label file in config.dataset. Writes the
/// checkpoint after every epoch and one log record per epoch. The label file is parsed
/// before anything is written.
std::vector<EpochRecord> cmd_train_acan(const RunConfig& config, const TrainAcanOptions& options = {});

/// Metrics of a stored attribute network on a labelled dataset. Throws DataError on an
/// empty dataset.
AcanMetrics cmd_eval_acan(const fs::path& checkpoint, const fs::path& label_file);

/// Attribute-guided CycleGAN training on the unpaired layout in config.dataset.
/// Throws ConfigError when config.acan_checkpoint is missing or holds no network.
/// Logs every step and, per epoch, oracle and network measurements of the translated
/// probe images; writes (original, translated, reconstructed) grids every
/// config.grid_every epochs and the final checkpoint.
void cmd_train_gan(const RunConfig& config);

/// Translates image files (directories are expanded) and writes PNGs named after the
/// inputs. `direction` is "ab" or "ba"; anything else throws UsageError.
std::vector<fs::path> cmd_translate(const fs::path& checkpoint, const std::vector<fs::path>& inputs,
                                    const std::string& direction, const fs::path& out_dir);

/// Writes one grid with a row per input: original, translated, reconstructed.
void cmd_grid(const fs::path& checkpoint, const std::vector<fs::path>& inputs,
              const std::string& direction, const fs::path& out_file);

/// Rows of (original, translated, reconstructed) in [0,1], tiled into 3 x H x (3W).
torch::Tensor triple_grid(const torch::Tensor& original, const torch::Tensor& translated,
                          const torch::Tensor& reconstructed);

/// Oracle and attribute-network measurements of a batch of [0,1] images.
nlohmann::json probe_measurements(const torch::Tensor& images, const AcanModel& acan);

}  // namespace acan
