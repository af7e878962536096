#include "acan/acan_model.hpp"

#include "acan/errors.hpp"

namespace acan {

namespace F = torch::nn::functional;

double AttributePrediction::rating(int64_t i, std::size_t slot) const {
  return to_rating_scale(scalars.index({i, static_cast<int64_t>(slot)}).item<double>());
}

int64_t AttributePrediction::predicted_class(int64_t i, std::size_t k) const {
  return class_log_probs.at(k)[i].argmax().item<int64_t>();
}

AttributePrediction AttributePrediction::from_probabilities(torch::Tensor scalars,
                                                            const std::vector<torch::Tensor>& probs) {
  AttributePrediction p;
  p.scalars = std::move(scalars);
  for (const auto& pr : probs) p.class_log_probs.push_back(pr.log());
  return p;
}

torch::Tensor gap_concat(const std::vector<torch::Tensor>& maps) {
  if (maps.empty()) throw InputError("gap_merge needs at least one feature map");
  const int64_t n = maps.front().size(0);
  std::vector<torch::Tensor> pooled;
  pooled.reserve(maps.size());
  for (const auto& m : maps) {
    if (m.dim() != 4) throw InputError("feature maps must be N x C x H x W");
    if (m.size(0) != n) throw InputError("feature maps disagree on batch size");
    pooled.push_back(m.mean({2, 3}));
  }
  return torch::cat(pooled, 1);
}

MergedFeature gap_merge(const std::vector<torch::Tensor>& maps) {
  return {F::normalize(gap_concat(maps), F::NormalizeFuncOptions().p(2).dim(1).eps(kMergeEpsilon))};
}

AcanNetImpl::AcanNetImpl(const BackboneConfig& config, const AttributeSchema& schema) {
  backbone = register_module("backbone", ResidualBackbone(config));
  heads = register_module("heads", torch::nn::ModuleList());
  const int64_t dim = config.merged_dim();
  for (const auto& def : schema.attributes()) {
    const int64_t outputs = def.is_scalar() ? 1 : static_cast<int64_t>(def.classes.size());
    heads->push_back(torch::nn::Linear(dim, outputs));
  }
}

namespace {

BackboneConfig checked(BackboneConfig c) {
  c.validate();
  return c;
}

}  // namespace

AcanModel::AcanModel(BackboneConfig config, AttributeSchema schema, std::uint64_t seed)
    : config_(checked(std::move(config))), schema_(std::move(schema)) {
  net_ = AcanNet(config_, schema_);
  init_parameters(*net_, seed, InitScheme::kKaimingFanOut);
  net_->eval();
}

std::vector<torch::Tensor> AcanModel::extract_block_features(const ImageBatch& images) const {
  require_range(images, ImageRange::kAcan);
  if (images.image_size() != config_.input_size()) {
    throw InputError("attribute network expects " + std::to_string(config_.input_size()) +
                     "px images, got " + std::to_string(images.image_size()));
  }
  if (images.batch_size() == 0) throw InputError("empty image batch");
  return net_.ptr()->backbone->forward(images.tensor().to(dtype()));
}

AttributePrediction AcanModel::predict_from_merged(const MergedFeature& merged) const {
  auto& heads = *net_.ptr()->heads;
  std::vector<torch::Tensor> scalar_cols;
  AttributePrediction out;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    auto logits = heads[i]->as<torch::nn::Linear>()->forward(merged.vector);
    if (schema_.at(i).is_scalar()) {
      scalar_cols.push_back(logits);
    } else {
      out.class_log_probs.push_back(torch::log_softmax(logits, 1));
    }
  }
  out.scalars = torch::cat(scalar_cols, 1);
  return out;
}

AttributePrediction AcanModel::predict(const ImageBatch& images) const {
  return predict_from_merged(gap_merge(extract_block_features(images)));
}

void AcanModel::freeze() {
  set_requires_grad(*net_, false);
  net_->eval();
  frozen_ = true;
}

void AcanModel::set_training(bool training) {
  if (training && frozen_) throw ConfigError("cannot train a frozen attribute network");
  net_->train(training);
}

void AcanModel::load_backbone_weights(const TensorMap& weights) {
  auto own = named_state(*net_->backbone);
  for (const auto& [name, _] : weights) {
    if (!own.count(name)) throw ConfigError("unknown backbone tensor '" + name + "'");
  }
  load_named_state(*net_->backbone, weights);
}

void AcanModel::to(torch::Dtype dtype) { net_->to(dtype); }

torch::Dtype AcanModel::dtype() const {
  return net_->parameters().front().scalar_type();
}

AcanModel AcanModel::clone() const {
  AcanModel copy(config_, schema_, 0);
  copy.to(dtype());
  copy.load_state(state());
  copy.net_->train(net_->is_training());
  if (frozen_) copy.freeze();
  return copy;
}

}  // namespace acan
