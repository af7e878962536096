#include "acan/schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "acan/errors.hpp"

namespace acan {

double to_rating_scale(double unit) {
  return kScalarMin + (kScalarMax - kScalarMin) * std::clamp(unit, 0.0, 1.0);
}

std::optional<std::int64_t> AttributeDef::class_index(std::string_view label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) return std::nullopt;
  return static_cast<std::int64_t>(it - classes.begin());
}

const std::vector<std::string>& hue_class_names() {
  static const std::vector<std::string> names = {
      "red",  "orange", "yellow", "chartreuse", "green",   "spring_green",
      "cyan", "azure",  "blue",   "violet",     "magenta", "rose"};
  return names;
}

const std::vector<std::string>& harmony_class_names() {
  static const std::vector<std::string> names = {"monochromatic", "analogous", "complementary"};
  return names;
}

namespace {

const char* const kCanonicalNames[AttributeSchema::kAttributeCount] = {
    "variety_of_texture", "variety_of_shape", "variety_of_size", "variety_of_color",
    "contrast",           "repetition",       "primary_color",   "color_harmony"};

}  // namespace

AttributeSchema::AttributeSchema(std::vector<AttributeDef> defs) : defs_(std::move(defs)) {
  if (defs_.size() != kAttributeCount) {
    throw ConfigError("attribute schema must hold exactly 8 attributes, got " +
                      std::to_string(defs_.size()));
  }
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    const auto& d = defs_[i];
    if (d.name != kCanonicalNames[i]) {
      throw ConfigError("attribute " + std::to_string(i) + " must be '" + kCanonicalNames[i] +
                        "', got '" + d.name + "'");
    }
    const bool want_scalar = i < kScalarCount;
    if (d.is_scalar() != want_scalar) {
      throw ConfigError("attribute '" + d.name + "' has the wrong kind");
    }
    if (d.is_scalar()) {
      if (!d.classes.empty()) throw ConfigError("scalar attribute '" + d.name + "' lists classes");
      continue;
    }
    if (d.classes.empty()) throw ConfigError("categorical attribute '" + d.name + "' has no classes");
    std::set<std::string> seen(d.classes.begin(), d.classes.end());
    if (seen.size() != d.classes.size()) {
      throw ConfigError("categorical attribute '" + d.name + "' has duplicate classes");
    }
  }
  if (defs_[attr::kPrimaryColor].classes.size() != kHueBins) {
    throw ConfigError("primary_color needs 12 hue classes");
  }
  if (defs_[attr::kColorHarmony].classes.size() != 3) {
    throw ConfigError("color_harmony needs 3 classes");
  }
}

const AttributeSchema& AttributeSchema::canonical() {
  static const AttributeSchema schema = [] {
    std::vector<AttributeDef> defs;
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
      AttributeDef d;
      d.name = kCanonicalNames[i];
      if (i == attr::kPrimaryColor) {
        d.kind = AttributeKind::kCategorical;
        d.classes = hue_class_names();
      } else if (i == attr::kColorHarmony) {
        d.kind = AttributeKind::kCategorical;
        d.classes = harmony_class_names();
      }
      defs.push_back(std::move(d));
    }
    return AttributeSchema(std::move(defs));
  }();
  return schema;
}

std::optional<std::size_t> AttributeSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    if (defs_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t AttributeSchema::scalar_slot(std::size_t i) const {
  if (i >= kScalarCount) throw ConfigError("attribute " + std::to_string(i) + " is not scalar");
  return i;
}

std::size_t AttributeSchema::categorical_slot(std::size_t i) const {
  if (i < kScalarCount || i >= kAttributeCount) {
    throw ConfigError("attribute " + std::to_string(i) + " is not categorical");
  }
  return i - kScalarCount;
}

nlohmann::json AttributeSchema::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : defs_) {
    out.push_back({{"name", d.name},
                   {"kind", d.is_scalar() ? "scalar" : "categorical"},
                   {"classes", d.classes}});
  }
  return out;
}

AttributeSchema AttributeSchema::from_json(const nlohmann::json& j) {
  std::vector<AttributeDef> defs;
  try {
    for (const auto& item : j) {
      AttributeDef d;
      d.name = item.at("name").get<std::string>();
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "scalar") {
        d.kind = AttributeKind::kScalar;
      } else if (kind == "categorical") {
        d.kind = AttributeKind::kCategorical;
      } else {
        throw ConfigError("unknown attribute kind '" + kind + "'");
      }
      d.classes = item.at("classes").get<std::vector<std::string>>();
      defs.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
  return AttributeSchema(std::move(defs));
}

bool AttributeSchema::operator==(const AttributeSchema& other) const {
  if (defs_.size() != other.defs_.size()) return false;
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    if (defs_[i].name != other.defs_[i].name || defs_[i].kind != other.defs_[i].kind ||
        defs_[i].classes != other.defs_[i].classes) {
      return false;
    }
  }
  return true;
}

void AttributeLabel::validate(const AttributeSchema& schema) const {
  if (scalars.size() != AttributeSchema::kScalarCount) {
    throw LabelError("label needs 6 scalar values, got " + std::to_string(scalars.size()));
  }
  if (classes.size() != AttributeSchema::kCategoricalCount) {
    throw LabelError("label needs 2 class indices, got " + std::to_string(classes.size()));
  }
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    const double v = scalars[i];
    if (!std::isfinite(v) || v < kScalarMin || v > kScalarMax) {
      throw LabelError("'" + schema.at(i).name + "' = " + std::to_string(v) + " is outside [1,10]");
    }
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& def = schema.at(schema.categorical_attribute(k));
    if (classes[k] < 0 || classes[k] >= static_cast<std::int64_t>(def.classes.size())) {
      throw LabelError("'" + def.name + "' class index " + std::to_string(classes[k]) +
                       " is out of range");
    }
  }
}

}  // namespace acan
