#include "acan/tensor_util.hpp"

#include <cmath>
#include <cstring>

#include <ATen/CPUGeneratorImpl.h>

#include "acan/errors.hpp"

namespace acan {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

int64_t fan_in(const torch::Tensor& w) { return w.numel() / w.size(0); }
int64_t fan_out(const torch::Tensor& w) { return w.numel() / w.size(1); }

}  // namespace

void init_parameters(torch::nn::Module& module, std::uint64_t seed, InitScheme scheme) {
  torch::NoGradGuard no_grad;
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  for (auto& item : module.named_modules()) {
    auto& m = *item.value();
    if (auto* c = m.as<torch::nn::Conv2dImpl>()) {
      if (scheme == InitScheme::kKaimingFanOut) {
        c->weight.normal_(0.0, std::sqrt(2.0 / static_cast<double>(fan_out(c->weight))), gen);
      } else {
        c->weight.normal_(0.0, 0.02, gen);
      }
      if (c->bias.defined()) c->bias.zero_();
    } else if (auto* t = m.as<torch::nn::ConvTranspose2dImpl>()) {
      t->weight.normal_(0.0, 0.02, gen);
      if (t->bias.defined()) t->bias.zero_();
    } else if (auto* l = m.as<torch::nn::LinearImpl>()) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in(l->weight)));
      l->weight.uniform_(-bound, bound, gen);
      if (l->bias.defined()) l->bias.zero_();
    } else if (auto* bn = m.as<torch::nn::BatchNorm2dImpl>()) {
      if (bn->weight.defined()) bn->weight.fill_(1.0);
      if (bn->bias.defined()) bn->bias.zero_();
    } else if (auto* in = m.as<torch::nn::InstanceNorm2dImpl>()) {
      if (in->weight.defined()) in->weight.fill_(1.0);
      if (in->bias.defined()) in->bias.zero_();
    }
  }
}

TensorMap named_state(const torch::nn::Module& module, const std::string& prefix) {
  TensorMap out;
  for (const auto& p : module.named_parameters(true)) out.emplace(prefix + p.key(), p.value());
  for (const auto& b : module.named_buffers(true)) out.emplace(prefix + b.key(), b.value());
  return out;
}

void load_named_state(torch::nn::Module& module, const TensorMap& state, const std::string& prefix) {
  torch::NoGradGuard no_grad;
  auto copy_into = [&](const std::string& name, torch::Tensor& dst) {
    auto it = state.find(prefix + name);
    if (it == state.end()) throw ConfigError("missing tensor '" + prefix + name + "'");
    if (it->second.sizes() != dst.sizes()) {
      throw ConfigError("shape mismatch for '" + prefix + name + "'");
    }
    dst.copy_(it->second);
  };
  for (auto& p : module.named_parameters(true)) copy_into(p.key(), p.value());
  for (auto& b : module.named_buffers(true)) copy_into(b.key(), b.value());
}

std::uint64_t state_digest(const torch::nn::Module& module) {
  std::uint64_t h = kFnvOffset;
  for (const auto& [name, tensor] : named_state(module)) {
    fnv_mix(h, name.data(), name.size());
    auto t = tensor.detach().contiguous().cpu();
    fnv_mix(h, t.data_ptr(), t.numel() * t.element_size());
  }
  return h;
}

void set_requires_grad(torch::nn::Module& module, bool flag) {
  for (auto& p : module.parameters(true)) p.set_requires_grad(flag);
}

TensorMap adam_state(torch::optim::Adam& optimizer, const std::vector<torch::Tensor>& params,
                     const std::string& prefix) {
  TensorMap out;
  auto& states = optimizer.state();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto it = states.find(params[i].unsafeGetTensorImpl());
    if (it == states.end()) continue;
    auto& st = static_cast<torch::optim::AdamParamState&>(*it->second);
    const std::string key = prefix + std::to_string(i) + ".";
    out.emplace(key + "step", torch::tensor({st.step()}, torch::kInt64));
    out.emplace(key + "exp_avg", st.exp_avg());
    out.emplace(key + "exp_avg_sq", st.exp_avg_sq());
  }
  return out;
}

void load_adam_state(torch::optim::Adam& optimizer, const std::vector<torch::Tensor>& params,
                     const TensorMap& state, const std::string& prefix) {
  torch::NoGradGuard no_grad;
  auto& states = optimizer.state();
  states.clear();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string key = prefix + std::to_string(i) + ".";
    auto step = state.find(key + "step");
    if (step == state.end()) continue;
    auto avg = state.find(key + "exp_avg");
    auto avg_sq = state.find(key + "exp_avg_sq");
    if (avg == state.end() || avg_sq == state.end()) {
      throw ConfigError("incomplete optimizer state for parameter " + std::to_string(i));
    }
    if (avg->second.sizes() != params[i].sizes()) {
      throw ConfigError("optimizer state shape mismatch for parameter " + std::to_string(i));
    }
    auto st = std::make_unique<torch::optim::AdamParamState>();
    st->step(step->second.item<int64_t>());
    st->exp_avg(avg->second.clone().to(params[i].scalar_type()));
    st->exp_avg_sq(avg_sq->second.clone().to(params[i].scalar_type()));
    states[params[i].unsafeGetTensorImpl()] = std::move(st);
  }
}

bool bitwise_equal(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.scalar_type() != b.scalar_type() || a.sizes() != b.sizes()) return false;
  auto ca = a.detach().contiguous().cpu();
  auto cb = b.detach().contiguous().cpu();
  return std::memcmp(ca.data_ptr(), cb.data_ptr(), ca.numel() * ca.element_size()) == 0;
}

}  // namespace acan
