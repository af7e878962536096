#include "acan/gan.hpp"

#include <algorithm>

#include "acan/errors.hpp"

namespace acan {

namespace nn = torch::nn;

void GanConfig::validate() const {
  if (image_size <= 0) throw ConfigError("image size must be positive");
  if (generator_width <= 0 || discriminator_width <= 0) throw ConfigError("widths must be positive");
  if (generator_blocks < 0) throw ConfigError("generator blocks must be non-negative");
  if (generator_downsamplings < 0) throw ConfigError("downsamplings must be non-negative");
  if (discriminator_layers < 1) throw ConfigError("discriminator needs at least one layer");
  if (image_size % (int64_t{1} << generator_downsamplings) != 0) {
    throw ConfigError("image size must be divisible by 2^downsamplings");
  }
}

nlohmann::json GanConfig::to_json() const {
  return {{"image_size", image_size},
          {"generator_width", generator_width},
          {"generator_blocks", generator_blocks},
          {"generator_downsamplings", generator_downsamplings},
          {"discriminator_width", discriminator_width},
          {"discriminator_layers", discriminator_layers}};
}

GanConfig GanConfig::from_json(const nlohmann::json& j) {
  GanConfig c;
  c.image_size = j.value("image_size", c.image_size);
  c.generator_width = j.value("generator_width", c.generator_width);
  c.generator_blocks = j.value("generator_blocks", c.generator_blocks);
  c.generator_downsamplings = j.value("generator_downsamplings", c.generator_downsamplings);
  c.discriminator_width = j.value("discriminator_width", c.discriminator_width);
  c.discriminator_layers = j.value("discriminator_layers", c.discriminator_layers);
  c.validate();
  return c;
}

namespace {

nn::InstanceNorm2d inorm(int64_t c) { return nn::InstanceNorm2d(nn::InstanceNorm2dOptions(c)); }

nn::LeakyReLU lrelu() { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); }

}  // namespace

ResnetBlockImpl::ResnetBlockImpl(int64_t channels) {
  body_ = register_module(
      "body", nn::Sequential(nn::ReflectionPad2d(1), nn::Conv2d(nn::Conv2dOptions(channels, channels, 3)),
                             inorm(channels), nn::ReLU(), nn::ReflectionPad2d(1),
                             nn::Conv2d(nn::Conv2dOptions(channels, channels, 3)), inorm(channels)));
}

torch::Tensor ResnetBlockImpl::forward(const torch::Tensor& x) { return x + body_->forward(x); }

GeneratorImpl::GeneratorImpl(const GanConfig& config) {
  config.validate();
  const int64_t w = config.generator_width;
  nn::Sequential s;
  s->push_back(nn::ReflectionPad2d(3));
  s->push_back(nn::Conv2d(nn::Conv2dOptions(3, w, 7)));
  s->push_back(inorm(w));
  s->push_back(nn::ReLU());
  int64_t ch = w;
  for (int64_t i = 0; i < config.generator_downsamplings; ++i) {
    s->push_back(nn::Conv2d(nn::Conv2dOptions(ch, ch * 2, 3).stride(2).padding(1)));
    s->push_back(inorm(ch * 2));
    s->push_back(nn::ReLU());
    ch *= 2;
  }
  for (int64_t i = 0; i < config.generator_blocks; ++i) s->push_back(ResnetBlock(ch));
  for (int64_t i = 0; i < config.generator_downsamplings; ++i) {
    s->push_back(nn::ConvTranspose2d(
        nn::ConvTranspose2dOptions(ch, ch / 2, 3).stride(2).padding(1).output_padding(1)));
    s->push_back(inorm(ch / 2));
    s->push_back(nn::ReLU());
    ch /= 2;
  }
  s->push_back(nn::ReflectionPad2d(3));
  s->push_back(nn::Conv2d(nn::Conv2dOptions(ch, 3, 7)));
  s->push_back(nn::Tanh());
  net_ = register_module("net", s);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& x) { return net_->forward(x); }

DiscriminatorImpl::DiscriminatorImpl(const GanConfig& config) {
  config.validate();
  // stride-2 k4 p1 layers, then two stride-1 k4 p1 layers
  int64_t side = config.image_size;
  for (int64_t i = 0; i < config.discriminator_layers; ++i) side = (side + 2 - 4) / 2 + 1;
  if (side - 2 < 1) throw ConfigError("image size too small for the discriminator depth");
  const int64_t w = config.discriminator_width;
  nn::Sequential s;
  s->push_back(nn::Conv2d(nn::Conv2dOptions(3, w, 4).stride(2).padding(1)));
  s->push_back(lrelu());
  int64_t mult = 1;
  for (int64_t n = 1; n < config.discriminator_layers; ++n) {
    const int64_t prev = mult;
    mult = std::min<int64_t>(int64_t{1} << n, 8);
    s->push_back(nn::Conv2d(nn::Conv2dOptions(w * prev, w * mult, 4).stride(2).padding(1)));
    s->push_back(inorm(w * mult));
    s->push_back(lrelu());
  }
  const int64_t prev = mult;
  mult = std::min<int64_t>(int64_t{1} << config.discriminator_layers, 8);
  s->push_back(nn::Conv2d(nn::Conv2dOptions(w * prev, w * mult, 4).stride(1).padding(1)));
  s->push_back(inorm(w * mult));
  s->push_back(lrelu());
  s->push_back(nn::Conv2d(nn::Conv2dOptions(w * mult, 1, 4).stride(1).padding(1)));
  net_ = register_module("net", s);
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& x) { return net_->forward(x); }

GanPair::GanPair(const GanConfig& cfg, std::uint64_t seed) : config(cfg) {
  config.validate();
  g_ab = Generator(config);
  g_ba = Generator(config);
  d_a = Discriminator(config);
  d_b = Discriminator(config);
  init_parameters(*g_ab, derive_seed(seed, 1), InitScheme::kNormal002);
  init_parameters(*g_ba, derive_seed(seed, 2), InitScheme::kNormal002);
  init_parameters(*d_a, derive_seed(seed, 3), InitScheme::kNormal002);
  init_parameters(*d_b, derive_seed(seed, 4), InitScheme::kNormal002);
}

std::vector<torch::Tensor> GanPair::generator_parameters() const {
  auto p = g_ab->parameters();
  auto q = g_ba->parameters();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

std::vector<torch::Tensor> GanPair::discriminator_parameters() const {
  auto p = d_a->parameters();
  auto q = d_b->parameters();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

TensorMap GanPair::state() const {
  TensorMap out = named_state(*g_ab, "g_ab.");
  out.merge(named_state(*g_ba, "g_ba."));
  out.merge(named_state(*d_a, "d_a."));
  out.merge(named_state(*d_b, "d_b."));
  return out;
}

void GanPair::load_state(const TensorMap& state) {
  load_named_state(*g_ab, state, "g_ab.");
  load_named_state(*g_ba, state, "g_ba.");
  load_named_state(*d_a, state, "d_a.");
  load_named_state(*d_b, state, "d_b.");
}

void GanPair::to(torch::Dtype dtype) {
  g_ab->to(dtype);
  g_ba->to(dtype);
  d_a->to(dtype);
  d_b->to(dtype);
}

ImageBatch generator_forward(Generator& g, const ImageBatch& images) {
  require_range(images, ImageRange::kGenerator);
  return ImageBatch(g->forward(images.tensor()), ImageRange::kGenerator);
}

torch::Tensor adversarial_loss(const torch::Tensor& d_out, bool target_is_real) {
  if (!torch::isfinite(d_out.detach()).all().item<bool>()) {
    throw NumericError("discriminator output contains non-finite values");
  }
  const double target = target_is_real ? 1.0 : 0.0;
  return (d_out - target).square().mean();
}

namespace {

torch::Tensor mean_abs_difference(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw InputError("image shapes differ");
  return (a - b).abs().mean();
}

}  // namespace

torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_rec) {
  return mean_abs_difference(x, x_rec);
}

torch::Tensor identity_loss(const torch::Tensor& y, const torch::Tensor& g_of_y) {
  return mean_abs_difference(y, g_of_y);
}

ImagePool::ImagePool(int64_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity_ < 0) throw ConfigError("pool capacity must be non-negative");
}

torch::Tensor ImagePool::query(const torch::Tensor& fresh) {
  auto detached = fresh.detach();
  if (capacity_ == 0) return detached;
  std::vector<torch::Tensor> out;
  out.reserve(static_cast<std::size_t>(detached.size(0)));
  for (int64_t i = 0; i < detached.size(0); ++i) {
    auto image = detached.narrow(0, i, 1).clone();
    if (size() < capacity_) {
      images_.push_back(image);
      out.push_back(image);
    } else if (rng_.chance(0.5)) {
      const auto slot = rng_.below(static_cast<std::uint64_t>(capacity_));
      out.push_back(images_[slot]);
      images_[slot] = image;
    } else {
      out.push_back(image);
    }
  }
  return torch::cat(out, 0);
}

TensorMap ImagePool::state(const std::string& prefix) const {
  TensorMap out;
  if (!images_.empty()) out.emplace(prefix + "images", torch::cat(images_, 0));
  return out;
}

void ImagePool::restore(const TensorMap& state, const std::string& prefix,
                        const std::string& rng_state) {
  images_.clear();
  auto it = state.find(prefix + "images");
  if (it != state.end()) {
    if (it->second.size(0) > capacity_) throw ConfigError("stored pool exceeds its capacity");
    for (int64_t i = 0; i < it->second.size(0); ++i) images_.push_back(it->second.narrow(0, i, 1).clone());
  }
  rng_.deserialize(rng_state);
}

}  // namespace acan
