#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "acan/acan_training.hpp"
#include "acan/random.hpp"
#include "acan/schema.hpp"

namespace acan::synth {

enum class ShapeKind { kCircle, kSquare, kTriangle };
enum class Texture { kFlat, kNoise, kStripes };

inline constexpr int kShapeKinds = 3;
inline constexpr int kTextures = 3;

struct Hsv {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;
  double v = 0.0;
};

/// One shape. `size` is the side (or diameter) as a fraction of the canvas side;
/// (cx, cy) is the centre as a fraction of the canvas. Triangles are isosceles,
/// apex up, with base and height equal to `size`.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kCircle;
  double size = 0.25;
  Hsv color;
  Texture texture = Texture::kFlat;
  double cx = 0.5;
  double cy = 0.5;
};

/// rows x cols copies of `motif`, one centred in each cell of an integer-aligned grid;
/// the motif's own position is ignored.
struct RepetitionGrid {
  ShapeSpec motif;
  int rows = 1;
  int cols = 1;
};

struct SceneSpec {
  int64_t canvas = 64;
  Hsv background;
  std::vector<ShapeSpec> shapes;
  std::optional<RepetitionGrid> grid;
  std::uint64_t seed = 0;  // texture noise

  /// Throws SpecError on out-of-range fields or shapes leaving the canvas.
  void validate() const;

  nlohmann::json to_json() const;
};

// Constants shared by the labeller and the image measures.
inline constexpr double kSaturationThreshold = 0.2;
inline constexpr double kMonochromaticSpread = 10.0;  // degrees
inline constexpr double kAnalogousSpread = 40.0;
inline constexpr double kComplementaryDistance = 180.0;
inline constexpr double kComplementaryTolerance = 20.0;
inline constexpr double kHueOccupancy = 0.005;   // fraction of pixels for a hue bin to count
inline constexpr double kHueSignificance = 0.002;  // saturation mass (per 1-degree bin) / pixels
inline constexpr int kMaxColorBins = 4;       // colour variety saturates at 4 hue bins
inline constexpr int kMaxGridCells = 16;
inline constexpr double kTextureLow = 0.6;    // darkest value multiplier of textures
inline constexpr int kStripePeriod = 3;       // pixels per stripe

/// Size bucket of a shape: [0,0.25), [0.25,0.35), [0.35,0.45), [0.45,1].
int size_bucket(double size);
/// 30-degree hue bin with bin i centred on 30*i degrees.
int hue_bin(double hue_degrees);

/// Rating for a count of distinct items out of `max_count` (counts above saturate).
double variety_rating(int count, int max_count);

/// Matches a set of hues (degrees) against the harmony templates:
/// spread <= 10 -> monochromatic, spread <= 40 -> analogous, two clusters each
/// spanning <= 40 with centres 180 +- 20 apart -> complementary. Empty -> monochromatic.
std::optional<Harmony> classify_harmony(std::vector<double> hues);

/// Deterministic rasterisation, 1 x 3 x canvas x canvas in [0,1].
torch::Tensor render_scene(const SceneSpec& spec);

/// Labels derived from the spec itself (not from pixels). Throws SpecError when the
/// saturated hues fit no harmony template.
AttributeLabel label_scene(const SceneSpec& spec);

// Image oracles. `image` is 3 x H x W or 1 x 3 x H x W with values in [0,1].

/// Rec. 601 luminance spread p95 - p5 (nearest rank), as 1 + 9 * spread.
double measure_contrast(const torch::Tensor& image);
/// Number of 30-degree hue bins holding at least 0.5% of the pixels (saturation > 0.2),
/// as a rating saturating at 4 bins.
double measure_color_variety(const torch::Tensor& image);
/// Hue bin with the largest saturation-weighted pixel mass; ties go to the lower bin.
int64_t measure_primary_color(const torch::Tensor& image);
/// Harmony template of the significant hues. Hue sets matching no template are
/// reported as complementary (they span more than the analogous range).
int64_t measure_harmony(const torch::Tensor& image);

/// Random template-conforming scene. Harmony class and base hue are chosen by the
/// caller so corpora can cycle through them.
SceneSpec sample_scene(Rng& rng, int64_t canvas, Harmony harmony, int base_bin);

struct CorpusItem {
  SceneSpec spec;
  torch::Tensor image;  // 1 x 3 x H x W
  AttributeLabel label;
};

/// n scenes; item i draws from a generator seeded by (seed, i) and cycles harmony
/// class (i mod 3) and base hue bin ((i / 3) mod 12).
std::vector<CorpusItem> generate_corpus(int64_t n, std::uint64_t seed, int64_t canvas = 64);

LabeledImages to_labeled_images(const std::vector<CorpusItem>& corpus);

/// Unpaired toy domains: red circles (A) and orange circles (B) on achromatic
/// backgrounds with varied values and textures. Returns 1 x 3 x H x W images in [0,1].
std::vector<torch::Tensor> generate_domain(char domain, int64_t n, std::uint64_t seed,
                                           int64_t canvas = 64);

}  // namespace acan::synth
