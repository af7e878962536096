#include "acan/cyclegan_trainer.hpp"

#include <cmath>

#include "acan/errors.hpp"

namespace acan {

void GanTrainConfig::validate() const {
  net.validate();
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("GAN learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (pool_capacity < 0) throw ConfigError("pool capacity must be non-negative");
  for (double w : {weights.adversarial, weights.cycle, weights.identity}) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights must be >= 0");
  }
}

nlohmann::json GanTrainConfig::to_json() const {
  return {{"net", net.to_json()},
          {"weights", weights.to_json()},
          {"learning_rate", learning_rate},
          {"beta1", beta1},
          {"beta2", beta2},
          {"pool_capacity", pool_capacity},
          {"seed", seed}};
}

GanTrainConfig GanTrainConfig::from_json(const nlohmann::json& j) {
  GanTrainConfig c;
  if (j.contains("net")) c.net = GanConfig::from_json(j["net"]);
  if (j.contains("weights")) c.weights = GanLossWeights::from_json(j["weights"]);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.pool_capacity = j.value("pool_capacity", c.pool_capacity);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

namespace {

GanTrainConfig checked(GanTrainConfig c) {
  c.validate();
  return c;
}

std::unique_ptr<torch::optim::Adam> make_adam(const std::vector<torch::Tensor>& params,
                                              const GanTrainConfig& c) {
  return std::make_unique<torch::optim::Adam>(
      params, torch::optim::AdamOptions(c.learning_rate).betas(std::make_tuple(c.beta1, c.beta2)));
}

void check_batch(const ImageBatch& b, const GanConfig& net, const char* which) {
  require_range(b, ImageRange::kGenerator);
  if (b.image_size() != net.image_size) {
    throw InputError(std::string("domain ") + which + " images must be " +
                     std::to_string(net.image_size) + "px");
  }
  if (b.batch_size() == 0) throw InputError(std::string("empty batch for domain ") + which);
}

}  // namespace

CycleGanTrainer::CycleGanTrainer(GanTrainConfig config)
    : config_(checked(std::move(config))),
      nets_(config_.net, config_.seed),
      pool_a_(config_.pool_capacity, derive_seed(config_.seed, 10)),
      pool_b_(config_.pool_capacity, derive_seed(config_.seed, 11)) {
  opt_g_ = make_adam(nets_.generator_parameters(), config_);
  opt_d_ = make_adam(nets_.discriminator_parameters(), config_);
}

void CycleGanTrainer::to(torch::Dtype dtype) {
  nets_.to(dtype);
  opt_g_ = make_adam(nets_.generator_parameters(), config_);
  opt_d_ = make_adam(nets_.discriminator_parameters(), config_);
}

std::array<torch::Tensor, kAttrCount> directional_attribute_losses(
    const AttributeGuidance& guidance, const torch::Tensor& fake_b, const torch::Tensor& fake_a) {
  const auto& acan = *guidance.acan;
  const auto& schema = acan.schema();
  std::array<torch::Tensor, kAttrCount> sum;
  auto accumulate = [&](const torch::Tensor& fake) {
    auto pred = acan.predict(range_bridge(ImageBatch(fake, ImageRange::kGenerator)));
    auto losses = attribute_losses(pred, guidance.target, schema);
    for (std::size_t i = 0; i < kAttrCount; ++i) sum[i] = sum[i].defined() ? sum[i] + losses[i] : losses[i];
  };
  if (guidance.direction != GuidanceDirection::kBtoA) accumulate(fake_b);
  if (guidance.direction != GuidanceDirection::kAtoB) accumulate(fake_a);
  return sum;
}

LossBreakdown CycleGanTrainer::step(const ImageBatch& batch_a, const ImageBatch& batch_b,
                                    const AttributeGuidance* guidance) {
  check_batch(batch_a, config_.net, "A");
  check_batch(batch_b, config_.net, "B");
  auto& g_ab = nets_.g_ab;
  auto& g_ba = nets_.g_ba;
  auto& d_a = nets_.d_a;
  auto& d_b = nets_.d_b;
  const auto real_a = batch_a.tensor();
  const auto real_b = batch_b.tensor();

  // Generators.
  set_requires_grad(*d_a, false);
  set_requires_grad(*d_b, false);
  opt_g_->zero_grad();
  auto fake_b = g_ab->forward(real_a);
  auto rec_a = g_ba->forward(fake_b);
  auto fake_a = g_ba->forward(real_b);
  auto rec_b = g_ab->forward(fake_a);
  auto idt_a = g_ba->forward(real_a);
  auto idt_b = g_ab->forward(real_b);

  GanTerms<torch::Tensor> terms{adversarial_loss(d_b->forward(fake_b), true),
                                adversarial_loss(d_a->forward(fake_a), true),
                                cycle_loss(real_a, rec_a),
                                cycle_loss(real_b, rec_b),
                                identity_loss(real_a, idt_a),
                                identity_loss(real_b, idt_b)};
  auto gan_total = weighted_gan_total(terms, config_.weights);

  LossWeights weights{config_.weights, {}};
  std::array<double, kAttrCount> attr_values{};
  torch::Tensor total = gan_total;
  if (guidance != nullptr) {
    weights.attribute = guidance->target.weights();
    auto attr = directional_attribute_losses(*guidance, fake_b, fake_a);
    total = weighted_total(gan_total, attr, weights.attribute);
    for (std::size_t i = 0; i < kAttrCount; ++i) attr_values[i] = attr[i].item<double>();
  }
  total.backward();
  opt_g_->step();

  // Discriminators, on pooled fakes.
  set_requires_grad(*d_a, true);
  set_requires_grad(*d_b, true);
  opt_d_->zero_grad();
  auto pooled_b = pool_b_.query(fake_b);
  auto pooled_a = pool_a_.query(fake_a);
  auto loss_d_b = (adversarial_loss(d_b->forward(real_b), true) +
                   adversarial_loss(d_b->forward(pooled_b), false)) * 0.5;
  auto loss_d_a = (adversarial_loss(d_a->forward(real_a), true) +
                   adversarial_loss(d_a->forward(pooled_a), false)) * 0.5;
  (loss_d_a + loss_d_b).backward();
  opt_d_->step();
  ++steps_done_;

  GanTerms<double> values{terms.adv_ab.item<double>(),  terms.adv_ba.item<double>(),
                          terms.cycle_a.item<double>(), terms.cycle_b.item<double>(),
                          terms.ident_a.item<double>(), terms.ident_b.item<double>()};
  auto breakdown = total_generator_loss(values, attr_values, weights);
  breakdown.disc_a = loss_d_a.item<double>();
  breakdown.disc_b = loss_d_b.item<double>();
  return breakdown;
}

ImageBatch CycleGanTrainer::translate(const ImageBatch& images, bool a_to_b) const {
  require_range(images, ImageRange::kGenerator);
  torch::NoGradGuard no_grad;
  auto g = a_to_b ? nets_.g_ab : nets_.g_ba;
  return ImageBatch(g->forward(images.tensor()), ImageRange::kGenerator);
}

void CycleGanTrainer::store(Checkpoint& ck) const {
  ck.insert("gan.", nets_.state());
  ck.insert("opt_g.", adam_state(*opt_g_, nets_.generator_parameters(), ""));
  ck.insert("opt_d.", adam_state(*opt_d_, nets_.discriminator_parameters(), ""));
  ck.insert("pool_a.", pool_a_.state(""));
  ck.insert("pool_b.", pool_b_.state(""));
  ck.meta["gan"] = {{"config", config_.to_json()},
                    {"steps_done", steps_done_},
                    {"pool_a_rng", pool_a_.rng_state()},
                    {"pool_b_rng", pool_b_.rng_state()}};
}

CycleGanTrainer CycleGanTrainer::restore(const Checkpoint& ck) {
  if (!ck.meta.contains("gan")) throw ConfigError("checkpoint holds no translation networks");
  const auto& meta = ck.meta["gan"];
  CycleGanTrainer t(GanTrainConfig::from_json(meta.at("config")));
  t.nets_.load_state(ck.with_prefix("gan."));
  load_adam_state(*t.opt_g_, t.nets_.generator_parameters(), ck.with_prefix("opt_g."), "");
  load_adam_state(*t.opt_d_, t.nets_.discriminator_parameters(), ck.with_prefix("opt_d."), "");
  t.pool_a_.restore(ck.with_prefix("pool_a."), "", meta.at("pool_a_rng").get<std::string>());
  t.pool_b_.restore(ck.with_prefix("pool_b."), "", meta.at("pool_b_rng").get<std::string>());
  t.steps_done_ = meta.at("steps_done").get<int64_t>();
  return t;
}

LossBreakdown guided_training_step(CycleGanTrainer& state, const ImageBatch& batch_a,
                                   const ImageBatch& batch_b, const AttributeGuidance& guidance) {
  if (guidance.acan == nullptr) throw ConfigError("guidance has no attribute network");
  if (!guidance.acan->frozen()) {
    throw ConfigError("the attribute network must be frozen before guided training");
  }
  if (guidance.acan->config().input_size() != state.config().net.image_size) {
    throw ConfigError("attribute network input size differs from the GAN image size");
  }
  return state.step(batch_a, batch_b, &guidance);
}

}  // namespace acan
