#include "acan/persistence.hpp"

#include "acan/errors.hpp"

namespace acan {

void store_acan(Checkpoint& ck, const AcanModel& model) {
  ck.insert("acan.", model.state());
  ck.meta["acan"] = {{"backbone", model.config().to_json()}, {"schema", model.schema().to_json()}};
}

bool has_acan(const Checkpoint& ck) { return ck.meta.contains("acan"); }

AcanModel restore_acan(const Checkpoint& ck) {
  if (!has_acan(ck)) throw ConfigError("checkpoint holds no attribute network");
  const auto& meta = ck.meta["acan"];
  AcanModel model(BackboneConfig::from_json(meta.at("backbone")),
                  AttributeSchema::from_json(meta.at("schema")), 0);
  model.load_state(ck.with_prefix("acan."));
  return model;
}

void store_acan_trainer(Checkpoint& ck, const AcanTrainer& trainer) {
  store_acan(ck, trainer.model());
  ck.insert("acan_opt.", trainer.optimizer_state());
  ck.meta["acan_training"] = {{"config", trainer.config().to_json()},
                              {"epochs_done", trainer.epochs_done()}};
}

AcanTrainer restore_acan_trainer(const Checkpoint& ck) {
  if (!ck.meta.contains("acan_training")) throw ConfigError("checkpoint holds no training state");
  const auto& meta = ck.meta["acan_training"];
  AcanTrainer trainer(restore_acan(ck), AcanTrainConfig::from_json(meta.at("config")));
  trainer.load_optimizer_state(ck.with_prefix("acan_opt."), meta.at("epochs_done").get<int64_t>());
  return trainer;
}

}  // namespace acan
