#include "acan/backbone.hpp"

#include "acan/errors.hpp"

namespace acan {

namespace nn = torch::nn;

const char* to_string(BackbonePreset preset) {
  switch (preset) {
    case BackbonePreset::kToy:
      return "toy";
    case BackbonePreset::kPaper:
      return "paper";
    case BackbonePreset::kCustom:
      return "custom";
  }
  return "custom";
}

BackbonePreset backbone_preset_from_string(const std::string& name) {
  if (name == "toy") return BackbonePreset::kToy;
  if (name == "paper") return BackbonePreset::kPaper;
  if (name == "custom") return BackbonePreset::kCustom;
  throw ConfigError("unknown backbone preset '" + name + "'");
}

BackboneConfig BackboneConfig::toy(int64_t input_size) {
  BackboneConfig c;
  c.stages = {{1, 16}, {1, 32}, {1, 64}, {1, 128}};
  c.stem_channels = 16;
  c.input_height = c.input_width = input_size;
  c.preset = BackbonePreset::kToy;
  return c;
}

BackboneConfig BackboneConfig::paper(int64_t input_size) {
  BackboneConfig c;
  c.stages = {{3, 256}, {4, 512}, {6, 1024}, {3, 2048}};
  c.stem_channels = 64;
  c.input_height = c.input_width = input_size;
  c.preset = BackbonePreset::kPaper;
  return c;
}

int64_t BackboneConfig::total_blocks() const {
  int64_t n = 0;
  for (const auto& s : stages) n += s.block_count;
  return n;
}

int64_t BackboneConfig::merged_dim() const {
  int64_t d = 0;
  for (const auto& s : stages) d += s.block_count * s.channels;
  return d;
}

void BackboneConfig::validate() const {
  if (stages.empty()) throw ConfigError("backbone needs at least one stage");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].block_count <= 0) {
      throw ConfigError("stage " + std::to_string(i) + " has no blocks");
    }
    if (stages[i].channels < 4 || stages[i].channels % 4 != 0) {
      throw ConfigError("stage " + std::to_string(i) + " channels must be a positive multiple of 4");
    }
  }
  if (stem_channels <= 0) throw ConfigError("stem channels must be positive");
  if (input_height <= 0 || input_width <= 0) throw ConfigError("input size must be positive");
  if (input_height != input_width) {
    throw ConfigError("input must be square, got " + std::to_string(input_height) + "x" +
                      std::to_string(input_width));
  }
}

nlohmann::json BackboneConfig::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) st.push_back({{"block_count", s.block_count}, {"channels", s.channels}});
  return {{"stages", st},
          {"stem_channels", stem_channels},
          {"input_height", input_height},
          {"input_width", input_width},
          {"preset", to_string(preset)}};
}

BackboneConfig BackboneConfig::from_json(const nlohmann::json& j) {
  BackboneConfig c;
  try {
    c.stages.clear();
    for (const auto& s : j.at("stages")) {
      c.stages.push_back({s.at("block_count").get<int64_t>(), s.at("channels").get<int64_t>()});
    }
    c.stem_channels = j.at("stem_channels").get<int64_t>();
    c.input_height = j.at("input_height").get<int64_t>();
    c.input_width = j.at("input_width").get<int64_t>();
    c.preset = backbone_preset_from_string(j.at("preset").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed backbone config: ") + e.what());
  }
  c.validate();
  return c;
}

bool BackboneConfig::operator==(const BackboneConfig& o) const {
  if (stages.size() != o.stages.size()) return false;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].block_count != o.stages[i].block_count ||
        stages[i].channels != o.stages[i].channels) {
      return false;
    }
  }
  return stem_channels == o.stem_channels && input_height == o.input_height &&
         input_width == o.input_width && preset == o.preset;
}

namespace {

nn::Conv2d conv(int64_t in, int64_t out, int64_t k, int64_t stride, int64_t pad) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride).padding(pad).bias(false));
}

}  // namespace

BottleneckImpl::BottleneckImpl(int64_t in_channels, int64_t out_channels, int64_t stride) {
  const int64_t width = out_channels / 4;
  conv1_ = register_module("conv1", conv(in_channels, width, 1, 1, 0));
  bn1_ = register_module("bn1", nn::BatchNorm2d(width));
  conv2_ = register_module("conv2", conv(width, width, 3, stride, 1));
  bn2_ = register_module("bn2", nn::BatchNorm2d(width));
  conv3_ = register_module("conv3", conv(width, out_channels, 1, 1, 0));
  bn3_ = register_module("bn3", nn::BatchNorm2d(out_channels));
  if (stride != 1 || in_channels != out_channels) {
    shortcut_ = register_module(
        "shortcut", nn::Sequential(conv(in_channels, out_channels, 1, stride, 0),
                                   nn::BatchNorm2d(out_channels)));
  }
}

torch::Tensor BottleneckImpl::forward(const torch::Tensor& x) {
  auto out = torch::relu(bn1_(conv1_(x)));
  out = torch::relu(bn2_(conv2_(out)));
  out = bn3_(conv3_(out));
  auto identity = shortcut_ ? shortcut_->forward(x) : x;
  return torch::relu(out + identity);
}

ResidualBackboneImpl::ResidualBackboneImpl(const BackboneConfig& config) {
  config.validate();
  stem_conv_ = register_module("stem_conv", conv(3, config.stem_channels, 7, 2, 3));
  stem_bn_ = register_module("stem_bn", nn::BatchNorm2d(config.stem_channels));
  blocks_ = register_module("blocks", nn::ModuleList());
  int64_t in = config.stem_channels;
  for (std::size_t s = 0; s < config.stages.size(); ++s) {
    const auto& stage = config.stages[s];
    for (int64_t b = 0; b < stage.block_count; ++b) {
      const int64_t stride = (s > 0 && b == 0) ? 2 : 1;
      blocks_->push_back(Bottleneck(in, stage.channels, stride));
      in = stage.channels;
    }
  }
}

std::vector<torch::Tensor> ResidualBackboneImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(stem_bn_(stem_conv_(x)));
  h = torch::max_pool2d(h, 3, 2, 1);
  std::vector<torch::Tensor> maps;
  maps.reserve(blocks_->size());
  for (const auto& block : *blocks_) {
    h = block->as<Bottleneck>()->forward(h);
    maps.push_back(h);
  }
  return maps;
}

}  // namespace acan
