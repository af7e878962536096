#include "acan/acan_training.hpp"

#include <cmath>
#include <numbers>

#include "acan/errors.hpp"
#include "acan/random.hpp"

namespace acan {

LabeledImages LabeledImages::subset(const std::vector<int64_t>& indices) const {
  LabeledImages out;
  out.images = images.index_select(0, torch::tensor(indices, torch::kInt64));
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(static_cast<std::size_t>(i)));
  return out;
}

LabelTensors pack_labels(const std::vector<AttributeLabel>& labels, const AttributeSchema& schema,
                         torch::Dtype dtype) {
  const auto n = static_cast<int64_t>(labels.size());
  auto scalars = torch::empty({n, static_cast<int64_t>(AttributeSchema::kScalarCount)}, torch::kFloat64);
  std::vector<torch::Tensor> classes(AttributeSchema::kCategoricalCount);
  for (auto& c : classes) c = torch::empty({n}, torch::kInt64);
  auto sa = scalars.accessor<double, 2>();
  for (int64_t i = 0; i < n; ++i) {
    const auto& label = labels[static_cast<std::size_t>(i)];
    label.validate(schema);
    for (std::size_t s = 0; s < AttributeSchema::kScalarCount; ++s) {
      sa[i][static_cast<int64_t>(s)] = to_unit_scale(label.scalars[s]);
    }
    for (std::size_t k = 0; k < AttributeSchema::kCategoricalCount; ++k) {
      classes[k].accessor<int64_t, 1>()[i] = label.classes[k];
    }
  }
  return {scalars.to(dtype), std::move(classes)};
}

std::array<double, AttributeSchema::kAttributeCount> SupervisedLoss::term_values() const {
  std::array<double, AttributeSchema::kAttributeCount> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = terms.at(i).item<double>();
  return out;
}

SupervisedLoss acan_supervised_loss(const AttributePrediction& pred, const LabelTensors& labels,
                                    const AttributeSchema& schema) {
  const int64_t n = pred.batch_size();
  if (labels.scalars.size(0) != n) throw LabelError("label count does not match the batch");
  SupervisedLoss out;
  auto target = labels.scalars.to(pred.scalars.scalar_type());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema.at(i).is_scalar()) {
      const auto slot = static_cast<int64_t>(schema.scalar_slot(i));
      auto diff = pred.scalars.select(1, slot) - target.select(1, slot);
      out.terms.push_back(diff.square().mean());
    } else {
      const auto k = schema.categorical_slot(i);
      const auto& cls = labels.classes.at(k);
      const auto classes = static_cast<int64_t>(schema.at(i).classes.size());
      if (cls.numel() > 0 && (cls.min().item<int64_t>() < 0 || cls.max().item<int64_t>() >= classes)) {
        throw LabelError("class index out of range for '" + schema.at(i).name + "'");
      }
      out.terms.push_back(torch::nll_loss(pred.class_log_probs.at(k), cls));
    }
  }
  out.total = out.terms.front();
  for (std::size_t i = 1; i < out.terms.size(); ++i) out.total = out.total + out.terms[i];
  return out;
}

SupervisedLoss acan_supervised_loss(const AttributePrediction& pred,
                                    const std::vector<AttributeLabel>& labels,
                                    const AttributeSchema& schema) {
  return acan_supervised_loss(pred, pack_labels(labels, schema, pred.scalars.scalar_type()), schema);
}

void AcanTrainConfig::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
}

torch::Tensor dihedral(const torch::Tensor& image, int64_t k) {
  auto out = k >= 4 ? image.flip({-1}) : image;
  return (k % 4) ? torch::rot90(out, k % 4, {-2, -1}) : out;
}

nlohmann::json AcanTrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"weight_decay", weight_decay},
          {"augment", augment},
          {"cosine_schedule", cosine_schedule},
          {"seed", seed}};
}

AcanTrainConfig AcanTrainConfig::from_json(const nlohmann::json& j) {
  AcanTrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.augment = j.value("augment", c.augment);
  c.cosine_schedule = j.value("cosine_schedule", c.cosine_schedule);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"loss", loss}, {"terms", terms}};
}

AcanTrainer::AcanTrainer(AcanModel model, AcanTrainConfig config)
    : model_(std::move(model)), config_(config) {
  config_.validate();
  if (model_.frozen()) throw ConfigError("cannot train a frozen attribute network");
  optimizer_ = std::make_unique<torch::optim::Adam>(
      model_.parameters(), torch::optim::AdamOptions(config_.learning_rate)
                               .weight_decay(config_.weight_decay));
}

namespace {

// Index batches of `batch_size`; a trailing batch of one joins its predecessor so
// batch norm always sees at least two samples.
std::vector<std::vector<int64_t>> make_batches(const std::vector<int64_t>& order, int64_t batch_size) {
  std::vector<std::vector<int64_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

}  // namespace

EpochRecord AcanTrainer::run_epoch(const LabeledImages& data) {
  if (data.size() == 0) throw DataError("cannot train on an empty dataset");
  const auto& schema = model_.schema();
  const auto packed = pack_labels(data.labels, schema, model_.dtype());

  if (config_.cosine_schedule) {
    const double progress = static_cast<double>(epochs_done_) / static_cast<double>(config_.epochs);
    const double lr = config_.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    for (auto& group : optimizer_->param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }
  }
  model_.set_training(true);
  const auto order = seeded_permutation(data.size(), config_.seed, 0x5EED0000ULL + epochs_done_);
  Rng augment_rng(derive_seed(config_.seed, 0xA06E0000ULL + static_cast<std::uint64_t>(epochs_done_)));
  EpochRecord rec;
  rec.epoch = epochs_done_ + 1;
  int64_t batches = 0;
  for (const auto& batch : make_batches(order, config_.batch_size)) {
    auto idx = torch::tensor(batch, torch::kInt64);
    auto pixels = data.images.index_select(0, idx);
    if (config_.augment) {
      std::vector<torch::Tensor> items;
      for (int64_t i = 0; i < pixels.size(0); ++i) {
        items.push_back(dihedral(pixels[i], static_cast<int64_t>(augment_rng.below(8))));
      }
      pixels = torch::stack(items);
    }
    ImageBatch images(pixels, ImageRange::kAcan);
    LabelTensors labels{packed.scalars.index_select(0, idx), {}};
    for (const auto& c : packed.classes) labels.classes.push_back(c.index_select(0, idx));

    optimizer_->zero_grad();
    auto loss = acan_supervised_loss(model_.predict(images), labels, schema);
    loss.total.backward();
    optimizer_->step();

    rec.loss += loss.total_value();
    const auto terms = loss.term_values();
    for (std::size_t i = 0; i < terms.size(); ++i) rec.terms[i] += terms[i];
    ++batches;
  }
  rec.loss /= static_cast<double>(batches);
  for (auto& t : rec.terms) t /= static_cast<double>(batches);
  model_.set_training(false);
  ++epochs_done_;
  return rec;
}

TensorMap AcanTrainer::optimizer_state() const {
  return adam_state(*optimizer_, model_.parameters(), "");
}

void AcanTrainer::load_optimizer_state(const TensorMap& state, int64_t epochs_done) {
  load_adam_state(*optimizer_, model_.parameters(), state, "");
  epochs_done_ = epochs_done;
}

AcanTrainResult train_acan(const LabeledImages& data, const AcanTrainConfig& config,
                           const BackboneConfig& backbone, const AttributeSchema& schema) {
  config.validate();
  if (data.size() == 0) throw DataError("cannot train on an empty dataset");
  AcanTrainer trainer(AcanModel(backbone, schema, config.seed), config);
  std::vector<EpochRecord> log;
  for (int64_t e = 0; e < config.epochs; ++e) log.push_back(trainer.run_epoch(data));
  return {trainer.model(), std::move(log)};
}

nlohmann::json AcanMetrics::to_json(const AttributeSchema& schema) const {
  nlohmann::json j;
  j["count"] = count;
  for (std::size_t s = 0; s < scalar_mae.size(); ++s) j["mae"][schema.at(s).name] = scalar_mae[s];
  for (std::size_t k = 0; k < accuracy.size(); ++k) {
    j["accuracy"][schema.at(schema.categorical_attribute(k)).name] = accuracy[k];
  }
  j["mean_scalar_mae"] = mean_scalar_mae;
  return j;
}

AcanMetrics evaluate_acan(const AcanModel& model, const LabeledImages& data, int64_t batch_size) {
  if (data.size() == 0) throw DataError("cannot evaluate on an empty dataset");
  if (model.is_training()) throw ConfigError("evaluate the attribute network in evaluation mode");
  torch::NoGradGuard no_grad;
  AcanMetrics m;
  m.count = data.size();
  for (int64_t start = 0; start < data.size(); start += batch_size) {
    const int64_t len = std::min(batch_size, data.size() - start);
    auto pred = model.predict(ImageBatch(data.images.narrow(0, start, len), ImageRange::kAcan));
    for (int64_t i = 0; i < len; ++i) {
      const auto& label = data.labels[static_cast<std::size_t>(start + i)];
      for (std::size_t s = 0; s < AttributeSchema::kScalarCount; ++s) {
        m.scalar_mae[s] += std::abs(pred.rating(i, s) - label.scalars[s]);
      }
      for (std::size_t k = 0; k < AttributeSchema::kCategoricalCount; ++k) {
        m.accuracy[k] += pred.predicted_class(i, k) == label.classes[k] ? 1.0 : 0.0;
      }
    }
  }
  const auto n = static_cast<double>(m.count);
  for (auto& v : m.scalar_mae) v /= n;
  for (auto& v : m.accuracy) v /= n;
  for (auto v : m.scalar_mae) m.mean_scalar_mae += v;
  m.mean_scalar_mae /= static_cast<double>(m.scalar_mae.size());
  return m;
}

}  // namespace acan
