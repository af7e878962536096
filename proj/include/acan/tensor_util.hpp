#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <torch/torch.h>

namespace acan {

using TensorMap = std::map<std::string, torch::Tensor>;

enum class InitScheme {
  kKaimingFanOut,  // residual backbones: conv ~ N(0, 2/fan_out), linear ~ U(+-1/sqrt(fan_in))
  kNormal002,      // translation networks: conv ~ N(0, 0.02)
};

/// Re-initialise every parameter of `module` from a generator seeded with `seed`.
/// Norm-layer scales become 1 and all biases 0.
void init_parameters(torch::nn::Module& module, std::uint64_t seed, InitScheme scheme);

/// Parameters and buffers keyed by their dotted names, prefixed with `prefix`.
TensorMap named_state(const torch::nn::Module& module, const std::string& prefix = "");

/// Copy tensors from `state` into `module`. Every parameter and buffer must be present
/// with an identical shape; throws ConfigError otherwise.
void load_named_state(torch::nn::Module& module, const TensorMap& state,
                      const std::string& prefix = "");

/// FNV-1a digest over names and raw bytes of every parameter and buffer.
std::uint64_t state_digest(const torch::nn::Module& module);

void set_requires_grad(torch::nn::Module& module, bool flag);

/// Adam moments and step counts of `params`, keyed "<prefix><index>.<field>".
TensorMap adam_state(torch::optim::Adam& optimizer, const std::vector<torch::Tensor>& params,
                     const std::string& prefix);
/// Inverse of adam_state. Parameters without saved state keep none.
void load_adam_state(torch::optim::Adam& optimizer, const std::vector<torch::Tensor>& params,
                     const TensorMap& state, const std::string& prefix);

/// Bitwise equality of two tensors (dtype, shape and bytes).
bool bitwise_equal(const torch::Tensor& a, const torch::Tensor& b);

}  // namespace acan
