#pragma once

#include "acan/acan_model.hpp"
#include "acan/acan_training.hpp"
#include "acan/checkpoint.hpp"

namespace acan {

/// Backbone configuration and schema in meta["acan"], weights under "acan.".
void store_acan(Checkpoint& ck, const AcanModel& model);
/// Throws ConfigError when the checkpoint holds no attribute network.
AcanModel restore_acan(const Checkpoint& ck);
bool has_acan(const Checkpoint& ck);

/// store_acan() plus optimiser moments under "acan_opt." and the training config and
/// epoch counter in meta["acan_training"].
void store_acan_trainer(Checkpoint& ck, const AcanTrainer& trainer);
/// Rebuilds a trainer that continues exactly where store_acan_trainer() left off.
AcanTrainer restore_acan_trainer(const Checkpoint& ck);

}  // namespace acan
