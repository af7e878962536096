#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace acan {

enum class AttributeKind { kScalar, kCategorical };

/// Scalar attributes live on the closed rating scale [kScalarMin, kScalarMax].
inline constexpr double kScalarMin = 1.0;
inline constexpr double kScalarMax = 10.0;

/// Rating (1..10) to model space (0..1).
inline double to_unit_scale(double rating) { return (rating - kScalarMin) / (kScalarMax - kScalarMin); }

/// Model space to rating, clamping the model output to [0, 1] first.
double to_rating_scale(double unit);

struct AttributeDef {
  std::string name;
  AttributeKind kind = AttributeKind::kScalar;
  std::vector<std::string> classes;  // empty for scalar attributes

  bool is_scalar() const { return kind == AttributeKind::kScalar; }
  std::optional<std::int64_t> class_index(std::string_view label) const;
};

/// The eight art composition attributes.
///
/// Canonical order: variety_of_texture, variety_of_shape, variety_of_size,
/// variety_of_color, contrast, repetition (scalars), then primary_color
/// (12-bin hue wheel, red at 0 degrees, 30 degree steps) and color_harmony
/// (monochromatic, analogous, complementary).
class AttributeSchema {
 public:
  static constexpr std::size_t kAttributeCount = 8;
  static constexpr std::size_t kScalarCount = 6;
  static constexpr std::size_t kCategoricalCount = 2;

  /// Throws ConfigError unless `defs` satisfies the canonical invariants.
  explicit AttributeSchema(std::vector<AttributeDef> defs);

  static const AttributeSchema& canonical();

  const std::vector<AttributeDef>& attributes() const { return defs_; }
  const AttributeDef& at(std::size_t i) const { return defs_.at(i); }
  std::size_t size() const { return defs_.size(); }

  /// Index in canonical order, or nullopt for unknown names.
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Position of attribute `i` among the scalar (or categorical) attributes.
  std::size_t scalar_slot(std::size_t i) const;
  std::size_t categorical_slot(std::size_t i) const;

  /// Attribute index of the k-th categorical attribute.
  std::size_t categorical_attribute(std::size_t k) const { return kScalarCount + k; }

  nlohmann::json to_json() const;
  static AttributeSchema from_json(const nlohmann::json& j);

  bool operator==(const AttributeSchema& other) const;

 private:
  std::vector<AttributeDef> defs_;
};

namespace attr {
inline constexpr std::size_t kVarietyOfTexture = 0;
inline constexpr std::size_t kVarietyOfShape = 1;
inline constexpr std::size_t kVarietyOfSize = 2;
inline constexpr std::size_t kVarietyOfColor = 3;
inline constexpr std::size_t kContrast = 4;
inline constexpr std::size_t kRepetition = 5;
inline constexpr std::size_t kPrimaryColor = 6;
inline constexpr std::size_t kColorHarmony = 7;
}  // namespace attr

enum class Harmony : std::int64_t { kMonochromatic = 0, kAnalogous = 1, kComplementary = 2 };

inline constexpr std::size_t kHueBins = 12;
inline constexpr double kHueBinWidth = 30.0;

/// Class names of the primary_color wheel, index i centred on 30*i degrees.
const std::vector<std::string>& hue_class_names();
const std::vector<std::string>& harmony_class_names();

/// Ground-truth labels for one image: six ratings in [1,10] plus two class indices.
struct AttributeLabel {
  std::vector<double> scalars;        // kScalarCount entries, rating scale
  std::vector<std::int64_t> classes;  // kCategoricalCount entries

  /// Throws LabelError if the label does not fit `schema`.
  void validate(const AttributeSchema& schema) const;

  bool operator==(const AttributeLabel&) const = default;
};

}  // namespace acan
