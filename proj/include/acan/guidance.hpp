#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "acan/acan_model.hpp"
#include "acan/schema.hpp"

namespace acan {

inline constexpr std::size_t kAttrCount = AttributeSchema::kAttributeCount;

/// Commanded value for one attribute.
struct TargetEntry {
  bool specified = false;
  double rating = kScalarMin;  // scalar attributes, 1..10
  int64_t class_index = 0;     // categorical attributes
  double weight = 0.0;
};

/// The eight per-run target values and their loss weights.
///
/// Unspecified attributes carry weight 0. Specified attributes default to weight 1.
class AttributeTarget {
 public:
  explicit AttributeTarget(const AttributeSchema& schema = AttributeSchema::canonical());

  /// Sets a scalar target (rating scale). Throws TargetError on range or kind mismatch.
  AttributeTarget& set_scalar(const std::string& name, double rating, double weight = 1.0);
  /// Sets a categorical target by class name.
  AttributeTarget& set_class(const std::string& name, const std::string& label, double weight = 1.0);
  AttributeTarget& set_class(const std::string& name, int64_t index, double weight = 1.0);

  /// Changes the weight of an attribute that already has a target.
  AttributeTarget& set_weight(const std::string& name, double weight);

  const TargetEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::array<TargetEntry, kAttrCount>& entries() const { return entries_; }
  std::array<double, kAttrCount> weights() const;
  const AttributeSchema& schema() const { return schema_; }

  /// Parses {"contrast": {"target": 10, "weight": 2}, "color_harmony": {"target":
  /// "complementary"}}. Unknown attribute names or fields throw TargetError.
  static AttributeTarget from_json(const nlohmann::json& doc,
                                   const AttributeSchema& schema = AttributeSchema::canonical());
  static AttributeTarget load(const std::string& path,
                              const AttributeSchema& schema = AttributeSchema::canonical());
  nlohmann::json to_json() const;

 private:
  std::size_t checked_index(const std::string& name) const;
  static void check_weight(const std::string& name, double weight);

  AttributeSchema schema_;
  std::array<TargetEntry, kAttrCount> entries_{};
};

/// Per-attribute discrepancy between prediction and target, batch-averaged.
///
/// Scalar attributes: squared difference to (target - 1) / 9. Categorical attributes:
/// cross-entropy of the predicted distribution against the target class. Unspecified
/// attributes yield a zero tensor. Throws TargetError if the schemas differ.
std::array<torch::Tensor, kAttrCount> attribute_losses(const AttributePrediction& pred,
                                                       const AttributeTarget& target,
                                                       const AttributeSchema& schema);

struct GanLossWeights {
  double adversarial = 1.0;
  double cycle = 10.0;
  double identity = 5.0;

  nlohmann::json to_json() const;
  static GanLossWeights from_json(const nlohmann::json& j);
  bool operator==(const GanLossWeights&) const = default;
};

struct LossWeights {
  GanLossWeights gan;
  std::array<double, kAttrCount> attribute{};
};

/// Standard CycleGAN generator terms.
template <typename T>
struct GanTerms {
  T adv_ab, adv_ba, cycle_a, cycle_b, ident_a, ident_b;
};

/// Weighted CycleGAN part, accumulated in the fixed order adv_ab, adv_ba, cycle_a,
/// cycle_b, ident_a, ident_b.
template <typename T>
T weighted_gan_total(const GanTerms<T>& t, const GanLossWeights& w) {
  T total = t.adv_ab * w.adversarial;
  total = total + t.adv_ba * w.adversarial;
  total = total + t.cycle_a * w.cycle;
  total = total + t.cycle_b * w.cycle;
  total = total + t.ident_a * w.identity;
  total = total + t.ident_b * w.identity;
  return total;
}

/// gan_total followed by the attribute terms in canonical order. With every attribute
/// weight 0 (and finite terms) the result is bitwise gan_total.
template <typename T>
T weighted_total(const T& gan_total, const std::array<T, kAttrCount>& attr,
                 const std::array<double, kAttrCount>& weights) {
  T total = gan_total;
  for (std::size_t i = 0; i < kAttrCount; ++i) total = total + attr[i] * weights[i];
  return total;
}

/// Itemised generator objective of one step.
struct LossBreakdown {
  double adv_ab = 0, adv_ba = 0, cycle_a = 0, cycle_b = 0, ident_a = 0, ident_b = 0;
  std::array<double, kAttrCount> attribute{};
  LossWeights weights;
  double gan_total = 0;
  double total = 0;
  double disc_a = 0, disc_b = 0;  // discriminator objectives, informational

  nlohmann::json to_json(const AttributeSchema& schema = AttributeSchema::canonical()) const;
};

/// Combines finite loss terms. Throws ConfigError on negative or non-finite weights
/// and NumericError on non-finite terms.
LossBreakdown total_generator_loss(const GanTerms<double>& gan_terms,
                                   const std::array<double, kAttrCount>& attr_terms,
                                   const LossWeights& weights);

/// Which translated images are scored by the attribute network.
enum class GuidanceDirection { kAtoB, kBtoA, kBoth };

const char* to_string(GuidanceDirection d);
GuidanceDirection guidance_direction_from_string(const std::string& s);

}  // namespace acan
