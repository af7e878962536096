#include "acan/guidance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "acan/errors.hpp"

namespace acan {

AttributeTarget::AttributeTarget(const AttributeSchema& schema) : schema_(schema) {}

std::size_t AttributeTarget::checked_index(const std::string& name) const {
  auto idx = schema_.index_of(name);
  if (!idx) throw TargetError("unknown attribute '" + name + "'");
  return *idx;
}

void AttributeTarget::check_weight(const std::string& name, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw TargetError("weight for '" + name + "' must be finite and non-negative");
  }
}

AttributeTarget& AttributeTarget::set_scalar(const std::string& name, double rating, double weight) {
  const auto i = checked_index(name);
  if (!schema_.at(i).is_scalar()) throw TargetError("'" + name + "' is categorical");
  if (!std::isfinite(rating) || rating < kScalarMin || rating > kScalarMax) {
    throw TargetError("target for '" + name + "' must be within [1,10]");
  }
  check_weight(name, weight);
  entries_[i] = TargetEntry{true, rating, 0, weight};
  return *this;
}

AttributeTarget& AttributeTarget::set_weight(const std::string& name, double weight) {
  const auto i = checked_index(name);
  if (!entries_[i].specified) throw TargetError("no target value given for '" + name + "'");
  check_weight(name, weight);
  entries_[i].weight = weight;
  return *this;
}

AttributeTarget& AttributeTarget::set_class(const std::string& name, const std::string& label,
                                            double weight) {
  const auto i = checked_index(name);
  if (schema_.at(i).is_scalar()) throw TargetError("'" + name + "' is scalar");
  auto idx = schema_.at(i).class_index(label);
  if (!idx) throw TargetError("'" + label + "' is not a class of '" + name + "'");
  return set_class(name, *idx, weight);
}

AttributeTarget& AttributeTarget::set_class(const std::string& name, int64_t index, double weight) {
  const auto i = checked_index(name);
  const auto& def = schema_.at(i);
  if (def.is_scalar()) throw TargetError("'" + name + "' is scalar");
  if (index < 0 || index >= static_cast<int64_t>(def.classes.size())) {
    throw TargetError("class index out of range for '" + name + "'");
  }
  check_weight(name, weight);
  entries_[i] = TargetEntry{true, kScalarMin, index, weight};
  return *this;
}

std::array<double, kAttrCount> AttributeTarget::weights() const {
  std::array<double, kAttrCount> w{};
  for (std::size_t i = 0; i < kAttrCount; ++i) w[i] = entries_[i].specified ? entries_[i].weight : 0.0;
  return w;
}

AttributeTarget AttributeTarget::from_json(const nlohmann::json& doc, const AttributeSchema& schema) {
  if (!doc.is_object()) throw TargetError("target document must be an object");
  AttributeTarget t(schema);
  for (const auto& [name, spec] : doc.items()) {
    const auto i = t.checked_index(name);
    if (!spec.is_object()) throw TargetError("'" + name + "' must map to {target, weight}");
    for (const auto& [field, _] : spec.items()) {
      if (field != "target" && field != "weight") {
        throw TargetError("unknown field '" + field + "' for '" + name + "'");
      }
    }
    if (!spec.contains("target")) throw TargetError("'" + name + "' has no target");
    double weight = 1.0;
    if (spec.contains("weight")) {
      if (!spec["weight"].is_number()) throw TargetError("weight of '" + name + "' must be a number");
      weight = spec["weight"].get<double>();
    }
    const auto& value = spec["target"];
    if (schema.at(i).is_scalar()) {
      if (!value.is_number()) throw TargetError("target of '" + name + "' must be a number");
      t.set_scalar(name, value.get<double>(), weight);
    } else if (value.is_string()) {
      t.set_class(name, value.get<std::string>(), weight);
    } else {
      throw TargetError("target of '" + name + "' must be a class name");
    }
  }
  return t;
}

AttributeTarget AttributeTarget::load(const std::string& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw TargetError("cannot open target file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw TargetError("malformed target file '" + path + "': " + e.what());
  }
  return from_json(doc, schema);
}

nlohmann::json AttributeTarget::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (std::size_t i = 0; i < kAttrCount; ++i) {
    const auto& e = entries_[i];
    if (!e.specified) continue;
    const auto& def = schema_.at(i);
    nlohmann::json target = def.is_scalar() ? nlohmann::json(e.rating)
                                            : nlohmann::json(def.classes[static_cast<std::size_t>(e.class_index)]);
    doc[def.name] = {{"target", target}, {"weight", e.weight}};
  }
  return doc;
}

std::array<torch::Tensor, kAttrCount> attribute_losses(const AttributePrediction& pred,
                                                       const AttributeTarget& target,
                                                       const AttributeSchema& schema) {
  if (!(target.schema() == schema)) throw TargetError("target was built for a different schema");
  std::array<torch::Tensor, kAttrCount> out;
  const auto opts = pred.scalars.options().requires_grad(false);
  const int64_t n = pred.batch_size();
  for (std::size_t i = 0; i < kAttrCount; ++i) {
    const auto& e = target.entry(i);
    if (!e.specified) {
      out[i] = torch::zeros({}, opts);
      continue;
    }
    if (schema.at(i).is_scalar()) {
      const auto slot = static_cast<int64_t>(schema.scalar_slot(i));
      out[i] = (pred.scalars.select(1, slot) - to_unit_scale(e.rating)).square().mean();
    } else {
      const auto k = schema.categorical_slot(i);
      auto cls = torch::full({n}, e.class_index, torch::kInt64);
      out[i] = torch::nll_loss(pred.class_log_probs.at(k), cls);
    }
  }
  return out;
}

nlohmann::json GanLossWeights::to_json() const {
  return {{"adversarial", adversarial}, {"cycle", cycle}, {"identity", identity}};
}

GanLossWeights GanLossWeights::from_json(const nlohmann::json& j) {
  GanLossWeights w;
  w.adversarial = j.value("adversarial", w.adversarial);
  w.cycle = j.value("cycle", w.cycle);
  w.identity = j.value("identity", w.identity);
  return w;
}

nlohmann::json LossBreakdown::to_json(const AttributeSchema& schema) const {
  nlohmann::json attr = nlohmann::json::object();
  nlohmann::json attr_w = nlohmann::json::object();
  for (std::size_t i = 0; i < kAttrCount; ++i) {
    attr[schema.at(i).name] = attribute[i];
    attr_w[schema.at(i).name] = weights.attribute[i];
  }
  return {{"adv_ab", adv_ab},   {"adv_ba", adv_ba},   {"cycle_a", cycle_a},
          {"cycle_b", cycle_b}, {"ident_a", ident_a}, {"ident_b", ident_b},
          {"attribute", attr},  {"weights", {{"gan", weights.gan.to_json()}, {"attribute", attr_w}}},
          {"gan_total", gan_total}, {"total", total}, {"disc_a", disc_a}, {"disc_b", disc_b}};
}

namespace {

void check_weight_value(const char* what, double w) {
  if (!std::isfinite(w) || w < 0.0) throw ConfigError(std::string(what) + " weight must be >= 0");
}

void check_term(const char* what, double v) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + " loss is not finite");
}

}  // namespace

LossBreakdown total_generator_loss(const GanTerms<double>& g,
                                   const std::array<double, kAttrCount>& attr,
                                   const LossWeights& weights) {
  check_weight_value("adversarial", weights.gan.adversarial);
  check_weight_value("cycle", weights.gan.cycle);
  check_weight_value("identity", weights.gan.identity);
  for (double w : weights.attribute) check_weight_value("attribute", w);
  check_term("adv_ab", g.adv_ab);
  check_term("adv_ba", g.adv_ba);
  check_term("cycle_a", g.cycle_a);
  check_term("cycle_b", g.cycle_b);
  check_term("ident_a", g.ident_a);
  check_term("ident_b", g.ident_b);
  for (double v : attr) check_term("attribute", v);

  LossBreakdown b;
  b.adv_ab = g.adv_ab;
  b.adv_ba = g.adv_ba;
  b.cycle_a = g.cycle_a;
  b.cycle_b = g.cycle_b;
  b.ident_a = g.ident_a;
  b.ident_b = g.ident_b;
  b.attribute = attr;
  b.weights = weights;
  b.gan_total = weighted_gan_total(g, weights.gan);
  b.total = weighted_total(b.gan_total, attr, weights.attribute);
  return b;
}

const char* to_string(GuidanceDirection d) {
  switch (d) {
    case GuidanceDirection::kAtoB:
      return "ab";
    case GuidanceDirection::kBtoA:
      return "ba";
    case GuidanceDirection::kBoth:
      return "both";
  }
  return "both";
}

GuidanceDirection guidance_direction_from_string(const std::string& s) {
  if (s == "ab") return GuidanceDirection::kAtoB;
  if (s == "ba") return GuidanceDirection::kBtoA;
  if (s == "both") return GuidanceDirection::kBoth;
  throw ConfigError("unknown guidance direction '" + s + "' (expected ab, ba or both)");
}

}  // namespace acan
