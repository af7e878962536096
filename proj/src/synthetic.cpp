#include "acan/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "acan/errors.hpp"
#include "acan/random.hpp"

namespace acan::synth {

namespace {

constexpr double kRec601[3] = {0.299, 0.587, 0.114};
constexpr int kNoiseAtoms = 16;

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(const Hsv& c) {
  const double h = std::fmod(std::fmod(c.h, 360.0) + 360.0, 360.0) / 60.0;
  const double chroma = c.v * c.s;
  const double x = chroma * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = c.v - chroma;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = chroma, g = x; break;
    case 1: r = x, g = chroma; break;
    case 2: g = chroma, b = x; break;
    case 3: g = x, b = chroma; break;
    case 4: r = x, b = chroma; break;
    default: r = chroma, b = x; break;
  }
  return {r + m, g + m, b + m};
}

Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta <= 0.0) return out;
  double h;
  if (mx == r) {
    h = std::fmod((g - b) / delta, 6.0);
  } else if (mx == g) {
    h = (b - r) / delta + 2.0;
  } else {
    h = (r - g) / delta + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

double luminance(const Rgb& c) { return kRec601[0] * c.r + kRec601[1] * c.g + kRec601[2] * c.b; }

bool inside(ShapeKind kind, double dx, double dy, double half) {
  switch (kind) {
    case ShapeKind::kCircle:
      return dx * dx + dy * dy <= half * half;
    case ShapeKind::kSquare:
      return std::abs(dx) <= half && std::abs(dy) <= half;
    case ShapeKind::kTriangle:
      return dy >= -half && dy <= half && std::abs(dx) <= 0.5 * (dy + half);
  }
  return false;
}

double texture_multiplier(Texture t, std::uint64_t seed, int64_t lx, int64_t ly) {
  switch (t) {
    case Texture::kFlat:
      return 1.0;
    case Texture::kNoise: {
      const auto bits = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ly) * 8191u +
                                                     static_cast<std::uint64_t>(lx)));
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      return kTextureLow + (1.0 - kTextureLow) * u;
    }
    case Texture::kStripes:
      return ((lx / kStripePeriod) % 2 == 0) ? 1.0 : kTextureLow;
  }
  return 1.0;
}

// Calls f(x, y, lx, ly) for every pixel whose centre lies inside the shape centred at
// pixel coordinates (cxp, cyp); (lx, ly) are non-negative local texture coordinates.
template <typename F>
void for_each_covered(int64_t canvas, const ShapeSpec& s, double cxp, double cyp, F&& f) {
  const double half = 0.5 * s.size * static_cast<double>(canvas);
  const auto ox = static_cast<int64_t>(std::floor(cxp - half)) - 1;
  const auto oy = static_cast<int64_t>(std::floor(cyp - half)) - 1;
  const int64_t x0 = std::max<int64_t>(0, ox);
  const int64_t y0 = std::max<int64_t>(0, oy);
  const int64_t x1 = std::min<int64_t>(canvas - 1, static_cast<int64_t>(std::ceil(cxp + half)) + 1);
  const int64_t y1 = std::min<int64_t>(canvas - 1, static_cast<int64_t>(std::ceil(cyp + half)) + 1);
  for (int64_t y = y0; y <= y1; ++y) {
    for (int64_t x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cxp;
      const double dy = static_cast<double>(y) + 0.5 - cyp;
      if (inside(s.kind, dx, dy, half)) f(x, y, x - ox, y - oy);
    }
  }
}

struct GridGeometry {
  int64_t cell_w, cell_h, off_x, off_y;
};

GridGeometry grid_geometry(const RepetitionGrid& g, int64_t canvas) {
  GridGeometry geo{canvas / g.cols, canvas / g.rows, 0, 0};
  geo.off_x = (canvas - geo.cell_w * g.cols) / 2;
  geo.off_y = (canvas - geo.cell_h * g.rows) / 2;
  return geo;
}

std::uint64_t shape_texture_seed(const SceneSpec& spec, std::size_t i);
std::uint64_t motif_texture_seed(const SceneSpec& spec);

// Calls f(region, shape, cxp, cyp, texture_seed) for every drawn instance in paint
// order: grid motifs first, then free shapes. Free shape i is region i and the grid
// is region shapes.size().
template <typename F>
void for_each_instance(const SceneSpec& spec, F&& f) {
  const int64_t c = spec.canvas;
  if (spec.grid) {
    const auto& g = *spec.grid;
    const auto geo = grid_geometry(g, c);
    const auto seed = motif_texture_seed(spec);
    for (int r = 0; r < g.rows; ++r) {
      for (int k = 0; k < g.cols; ++k) {
        const double cx = static_cast<double>(geo.off_x + k * geo.cell_w) + geo.cell_w / 2.0;
        const double cy = static_cast<double>(geo.off_y + r * geo.cell_h) + geo.cell_h / 2.0;
        f(spec.shapes.size(), g.motif, cx, cy, seed);
      }
    }
  }
  for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
    const auto& s = spec.shapes[i];
    f(i, s, s.cx * static_cast<double>(c), s.cy * static_cast<double>(c), shape_texture_seed(spec, i));
  }
}

std::uint64_t shape_texture_seed(const SceneSpec& spec, std::size_t i) {
  return derive_seed(spec.seed, i + 1);
}
std::uint64_t motif_texture_seed(const SceneSpec& spec) { return derive_seed(spec.seed, 0x6121DULL); }

void check_hsv(const Hsv& c, const std::string& what) {
  if (!(c.h >= 0.0 && c.h < 360.0)) throw SpecError(what + ": hue must lie in [0,360)");
  if (!(c.s >= 0.0 && c.s <= 1.0)) throw SpecError(what + ": saturation must lie in [0,1]");
  if (!(c.v >= 0.0 && c.v <= 1.0)) throw SpecError(what + ": value must lie in [0,1]");
}

void check_shape_fields(const ShapeSpec& s, const std::string& what) {
  check_hsv(s.color, what);
  if (!(s.size > 0.0 && s.size <= 1.0)) throw SpecError(what + ": size must lie in (0,1]");
}

// A homogeneous region of the scene as seen by the labeller.
struct Region {
  Hsv color;
  Texture texture;
  double area;
};

// Regions carry the fraction of pixel centres they cover, as painted.
std::vector<Region> regions(const SceneSpec& spec) {
  const int64_t c = spec.canvas;
  const std::size_t background = spec.shapes.size() + 1;
  std::vector<std::size_t> owner(static_cast<std::size_t>(c * c), background);
  for_each_instance(spec, [&](std::size_t region, const ShapeSpec& s, double cx, double cy, std::uint64_t) {
    for_each_covered(c, s, cx, cy, [&](int64_t x, int64_t y, int64_t, int64_t) {
      owner[static_cast<std::size_t>(y * c + x)] = region;
    });
  });
  std::vector<double> counts(background + 1, 0.0);
  for (auto o : owner) counts[o] += 1.0;
  const double total = static_cast<double>(c * c);
  std::vector<Region> out;
  for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
    out.push_back({spec.shapes[i].color, spec.shapes[i].texture, counts[i] / total});
  }
  if (spec.grid) {
    out.push_back({spec.grid->motif.color, spec.grid->motif.texture, counts[spec.shapes.size()] / total});
  }
  out.push_back({spec.background, Texture::kFlat, counts[background] / total});
  return out;
}

// Luminance distribution of the scene as (luminance, area) atoms.
std::vector<std::pair<double, double>> luminance_atoms(const SceneSpec& spec) {
  std::vector<std::pair<double, double>> atoms;
  for (const auto& r : regions(spec)) {
    if (r.area <= 0.0) continue;
    const double lum = luminance(hsv_to_rgb(r.color));
    switch (r.texture) {
      case Texture::kFlat:
        atoms.emplace_back(lum, r.area);
        break;
      case Texture::kStripes:
        atoms.emplace_back(lum, 0.5 * r.area);
        atoms.emplace_back(lum * kTextureLow, 0.5 * r.area);
        break;
      case Texture::kNoise:
        for (int k = 0; k < kNoiseAtoms; ++k) {
          const double m = kTextureLow + (1.0 - kTextureLow) * (k + 0.5) / kNoiseAtoms;
          atoms.emplace_back(lum * m, r.area / kNoiseAtoms);
        }
        break;
    }
  }
  std::sort(atoms.begin(), atoms.end());
  return atoms;
}

double atom_quantile(const std::vector<std::pair<double, double>>& atoms, double p) {
  double total = 0.0;
  for (const auto& a : atoms) total += a.second;
  double cum = 0.0;
  for (const auto& a : atoms) {
    cum += a.second;
    if (cum >= p * total) return a.first;
  }
  return atoms.back().first;
}

std::array<double, kHueBins> primary_weights(const SceneSpec& spec) {
  std::array<double, kHueBins> w{};
  for (const auto& r : regions(spec)) {
    if (r.color.s > kSaturationThreshold && r.area > 0.0) {
      w[static_cast<std::size_t>(hue_bin(r.color.h))] += r.color.s * r.area;
    }
  }
  return w;
}

std::size_t argmax_lowest(const std::array<double, kHueBins>& w) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] > w[best]) best = i;
  }
  return best;
}

double circular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

// Pixels of an image as contiguous doubles, channel-major.
struct Pixels {
  torch::Tensor data;  // 3 x N
  int64_t count;
};

Pixels pixels_of(const torch::Tensor& image) {
  auto t = image.detach().to(torch::kCPU, torch::kFloat64);
  if (t.dim() == 4) {
    if (t.size(0) != 1) throw InputError("image measures take a single image");
    t = t.squeeze(0);
  }
  if (t.dim() != 3 || t.size(0) != 3) throw InputError("image must be 3 x H x W");
  t = t.reshape({3, -1}).contiguous();
  return {t, t.size(1)};
}

template <typename F>
void for_each_hsv(const Pixels& p, F&& f) {
  auto a = p.data.accessor<double, 2>();
  for (int64_t i = 0; i < p.count; ++i) f(rgb_to_hsv(a[0][i], a[1][i], a[2][i]));
}

}  // namespace

int size_bucket(double size) {
  if (size < 0.25) return 0;
  if (size < 0.35) return 1;
  if (size < 0.45) return 2;
  return 3;
}

int hue_bin(double hue_degrees) {
  const double h = std::fmod(std::fmod(hue_degrees + kHueBinWidth / 2.0, 360.0) + 360.0, 360.0);
  return std::min(static_cast<int>(h / kHueBinWidth), static_cast<int>(kHueBins) - 1);
}

double variety_rating(int count, int max_count) {
  if (count <= 1 || max_count <= 1) return kScalarMin;
  const int c = std::min(count, max_count);
  return kScalarMin + (kScalarMax - kScalarMin) * (c - 1) / static_cast<double>(max_count - 1);
}

std::optional<Harmony> classify_harmony(std::vector<double> hues) {
  for (auto& h : hues) h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
  std::sort(hues.begin(), hues.end());
  hues.erase(std::unique(hues.begin(), hues.end()), hues.end());
  const std::size_t n = hues.size();
  if (n <= 1) return Harmony::kMonochromatic;

  std::vector<double> gaps(n);  // gap after hue i, wrapping
  for (std::size_t i = 0; i < n; ++i) {
    const double next = hues[(i + 1) % n] + (i + 1 == n ? 360.0 : 0.0);
    gaps[i] = next - hues[i];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return gaps[a] > gaps[b]; });

  const double spread = 360.0 - gaps[order[0]];
  if (spread <= kMonochromaticSpread) return Harmony::kMonochromatic;
  if (spread <= kAnalogousSpread) return Harmony::kAnalogous;

  // Split at the two largest gaps into two arcs of hues.
  const std::size_t g1 = std::min(order[0], order[1]);
  const std::size_t g2 = std::max(order[0], order[1]);
  auto arc = [&](std::size_t first, std::size_t last) {
    const double span = std::fmod(hues[last] - hues[first] + 360.0, 360.0);
    return std::pair<double, double>{span, hues[first] + span / 2.0};
  };
  const auto [span1, mid1] = arc((g1 + 1) % n, g2);
  const auto [span2, mid2] = arc((g2 + 1) % n, g1);
  if (span1 <= kAnalogousSpread && span2 <= kAnalogousSpread &&
      circular_distance(mid1, mid2) >= kComplementaryDistance - kComplementaryTolerance) {
    return Harmony::kComplementary;
  }
  return std::nullopt;
}

void SceneSpec::validate() const {
  if (canvas < 8) throw SpecError("canvas must be at least 8 pixels");
  check_hsv(background, "background");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& s = shapes[i];
    const std::string what = "shape " + std::to_string(i);
    check_shape_fields(s, what);
    const double half = s.size / 2.0;
    constexpr double kSlack = 1e-9;
    if (s.cx - half < -kSlack || s.cx + half > 1.0 + kSlack || s.cy - half < -kSlack ||
        s.cy + half > 1.0 + kSlack) {
      throw SpecError(what + " extends outside the canvas");
    }
  }
  if (grid) {
    check_shape_fields(grid->motif, "grid motif");
    if (grid->rows < 1 || grid->cols < 1) throw SpecError("grid needs at least one row and column");
    const auto geo = grid_geometry(*grid, canvas);
    if (grid->motif.size * static_cast<double>(canvas) >
        static_cast<double>(std::min(geo.cell_w, geo.cell_h))) {
      throw SpecError("grid motif does not fit its cell");
    }
  }
}

nlohmann::json SceneSpec::to_json() const {
  auto color = [](const Hsv& c) { return nlohmann::json{{"h", c.h}, {"s", c.s}, {"v", c.v}}; };
  auto shape = [&](const ShapeSpec& s) {
    return nlohmann::json{{"kind", static_cast<int>(s.kind)}, {"size", s.size},
                          {"color", color(s.color)},          {"texture", static_cast<int>(s.texture)},
                          {"cx", s.cx},                       {"cy", s.cy}};
  };
  nlohmann::json j{{"canvas", canvas}, {"background", color(background)}, {"seed", seed}};
  j["shapes"] = nlohmann::json::array();
  for (const auto& s : shapes) j["shapes"].push_back(shape(s));
  if (grid) j["grid"] = {{"motif", shape(grid->motif)}, {"rows", grid->rows}, {"cols", grid->cols}};
  return j;
}

torch::Tensor render_scene(const SceneSpec& spec) {
  spec.validate();
  const int64_t c = spec.canvas;
  auto img = torch::empty({3, c, c}, torch::kFloat32);
  const Rgb bg = hsv_to_rgb(spec.background);
  img[0].fill_(static_cast<float>(bg.r));
  img[1].fill_(static_cast<float>(bg.g));
  img[2].fill_(static_cast<float>(bg.b));
  auto px = img.accessor<float, 3>();
  for_each_instance(spec, [&](std::size_t, const ShapeSpec& s, double cx, double cy, std::uint64_t seed) {
    const Rgb base = hsv_to_rgb(s.color);
    for_each_covered(c, s, cx, cy, [&](int64_t x, int64_t y, int64_t lx, int64_t ly) {
      const double m = texture_multiplier(s.texture, seed, lx, ly);
      px[0][y][x] = static_cast<float>(base.r * m);
      px[1][y][x] = static_cast<float>(base.g * m);
      px[2][y][x] = static_cast<float>(base.b * m);
    });
  });
  return img.clamp(0.0, 1.0).unsqueeze(0);
}

AttributeLabel label_scene(const SceneSpec& spec) {
  spec.validate();
  std::vector<const ShapeSpec*> elements;
  for (const auto& s : spec.shapes) elements.push_back(&s);
  if (spec.grid) elements.push_back(&spec.grid->motif);

  std::set<int> textures, kinds, sizes, bins;
  for (const auto* e : elements) {
    textures.insert(static_cast<int>(e->texture));
    kinds.insert(static_cast<int>(e->kind));
    sizes.insert(size_bucket(e->size));
  }
  std::vector<double> hues;
  for (const auto& r : regions(spec)) {
    if (r.color.s > kSaturationThreshold && r.area > 0.0) {
      bins.insert(hue_bin(r.color.h));
      hues.push_back(r.color.h);
    }
  }
  const auto harmony = classify_harmony(hues);
  if (!harmony) throw SpecError("saturated hues match no harmony template");

  const auto atoms = luminance_atoms(spec);
  const double spread = atom_quantile(atoms, 0.95) - atom_quantile(atoms, 0.05);

  double repetition = kScalarMin;
  if (spec.grid) {
    const int cells = std::min(spec.grid->rows * spec.grid->cols, kMaxGridCells);
    repetition = kScalarMin + (kScalarMax - kScalarMin) * (cells - 1) / double(kMaxGridCells - 1);
  }

  AttributeLabel label;
  label.scalars = {variety_rating(static_cast<int>(textures.size()), kTextures),
                   variety_rating(static_cast<int>(kinds.size()), kShapeKinds),
                   variety_rating(static_cast<int>(sizes.size()), 4),
                   variety_rating(static_cast<int>(bins.size()), kMaxColorBins),
                   std::clamp(kScalarMin + (kScalarMax - kScalarMin) * spread, kScalarMin, kScalarMax),
                   repetition};
  label.classes = {static_cast<int64_t>(argmax_lowest(primary_weights(spec))),
                   static_cast<int64_t>(*harmony)};
  return label;
}

double measure_contrast(const torch::Tensor& image) {
  const auto p = pixels_of(image);
  auto a = p.data.accessor<double, 2>();
  std::vector<double> lum(static_cast<std::size_t>(p.count));
  for (int64_t i = 0; i < p.count; ++i) {
    lum[static_cast<std::size_t>(i)] = kRec601[0] * a[0][i] + kRec601[1] * a[1][i] + kRec601[2] * a[2][i];
  }
  std::sort(lum.begin(), lum.end());
  auto rank = [&](double q) {
    const auto k = static_cast<int64_t>(std::ceil(q * static_cast<double>(p.count))) - 1;
    return lum[static_cast<std::size_t>(std::clamp<int64_t>(k, 0, p.count - 1))];
  };
  const double spread = rank(0.95) - rank(0.05);
  return std::clamp(kScalarMin + (kScalarMax - kScalarMin) * spread, kScalarMin, kScalarMax);
}

double measure_color_variety(const torch::Tensor& image) {
  const auto p = pixels_of(image);
  std::array<int64_t, kHueBins> counts{};
  for_each_hsv(p, [&](const Hsv& c) {
    if (c.s > kSaturationThreshold) ++counts[static_cast<std::size_t>(hue_bin(c.h))];
  });
  const double min_count = kHueOccupancy * static_cast<double>(p.count);
  int occupied = 0;
  for (auto n : counts) occupied += static_cast<double>(n) >= min_count ? 1 : 0;
  return variety_rating(occupied, kMaxColorBins);
}

int64_t measure_primary_color(const torch::Tensor& image) {
  const auto p = pixels_of(image);
  std::array<double, kHueBins> w{};
  for_each_hsv(p, [&](const Hsv& c) {
    if (c.s > kSaturationThreshold) w[static_cast<std::size_t>(hue_bin(c.h))] += c.s;
  });
  return static_cast<int64_t>(argmax_lowest(w));
}

int64_t measure_harmony(const torch::Tensor& image) {
  const auto p = pixels_of(image);
  std::array<double, 360> hist{};
  for_each_hsv(p, [&](const Hsv& c) {
    if (c.s > kSaturationThreshold) hist[static_cast<std::size_t>(std::min(359.0, std::floor(c.h)))] += c.s;
  });
  const double min_mass = kHueSignificance * static_cast<double>(p.count);
  std::vector<double> hues;
  for (std::size_t d = 0; d < hist.size(); ++d) {
    if (hist[d] > 0.0 && hist[d] >= min_mass) hues.push_back(static_cast<double>(d) + 0.5);
  }
  const auto h = classify_harmony(hues);
  return static_cast<int64_t>(h ? *h : Harmony::kComplementary);
}

// --- scene sampling -------------------------------------------------------

namespace {

double jittered_hue(Rng& rng, int bin) {
  const double h = kHueBinWidth * ((bin % static_cast<int>(kHueBins) + kHueBins) % kHueBins) +
                   rng.uniform(-4.0, 4.0);
  return std::fmod(h + 360.0, 360.0);
}

Hsv saturated(Rng& rng, double hue) { return {hue, rng.uniform(0.55, 1.0), rng.uniform(0.5, 1.0)}; }
Hsv achromatic(Rng& rng) { return {rng.uniform(0.0, 359.0), rng.uniform(0.0, 0.1), rng.uniform(0.0, 1.0)}; }

double sample_size(Rng& rng, double max_size) {
  static constexpr double lo[4] = {0.15, 0.26, 0.36, 0.46};
  static constexpr double hi[4] = {0.24, 0.34, 0.44, 0.48};
  std::vector<int> fits;
  for (int b = 0; b < 4; ++b) {
    if (lo[b] <= max_size) fits.push_back(b);
  }
  const int b = fits[rng.below(fits.size())];
  return rng.uniform(lo[b], std::min(hi[b], max_size));
}

ShapeSpec sample_shape(Rng& rng, double max_size) {
  ShapeSpec s;
  s.kind = static_cast<ShapeKind>(rng.below(kShapeKinds));
  s.texture = static_cast<Texture>(rng.below(kTextures));
  s.size = sample_size(rng, max_size);
  return s;
}

// Smallest canvas share of any hue present in a generated scene, so every hue that
// decides colour variety or harmony is clearly visible.
constexpr double kMinHueShare = 0.04;

// Rejects scenes whose labels would sit on a knife edge for the image measures.
bool well_conditioned(const SceneSpec& spec) {
  try {
    (void)label_scene(spec);
  } catch (const SpecError&) {
    return false;
  }
  for (const auto& r : regions(spec)) {
    if (r.color.s > kSaturationThreshold && r.area > 0.0) {
      if (r.area < 2.0 * kHueOccupancy) return false;
      if (r.color.s * r.area < 3.0 * kHueSignificance) return false;
    }
  }
  std::array<double, kHueBins> share{};
  for (const auto& r : regions(spec)) {
    if (r.color.s > kSaturationThreshold) share[static_cast<std::size_t>(hue_bin(r.color.h))] += r.area;
  }
  for (double a : share) {
    if (a > 0.0 && a < kMinHueShare) return false;
  }
  auto w = primary_weights(spec);
  std::sort(w.begin(), w.end(), std::greater<>());
  if (w[1] > 0.0 && w[0] < 1.25 * w[1]) return false;

  const auto atoms = luminance_atoms(spec);
  double total = 0.0;
  for (const auto& a : atoms) total += a.second;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cum += atoms[i].second;
    if (atoms[i + 1].first - atoms[i].first <= 0.05) continue;
    const double c = cum / total;
    if (std::abs(c - 0.05) < 0.025 || std::abs(c - 0.95) < 0.025) return false;
  }
  return true;
}

SceneSpec sample_scene_once(Rng& rng, int64_t canvas, Harmony harmony, int base_bin) {
  SceneSpec spec;
  spec.canvas = canvas;
  spec.seed = rng.next();
  const int dir = rng.chance(0.5) ? 1 : -1;

  std::vector<double> palette;
  switch (harmony) {
    case Harmony::kMonochromatic:
      palette = {jittered_hue(rng, base_bin)};
      break;
    case Harmony::kAnalogous:
      palette = {jittered_hue(rng, base_bin), jittered_hue(rng, base_bin + dir)};
      break;
    case Harmony::kComplementary:
      if (rng.chance(0.5)) {
        palette = {jittered_hue(rng, base_bin), jittered_hue(rng, base_bin + 6)};
      } else {
        palette = {jittered_hue(rng, base_bin), jittered_hue(rng, base_bin + 6),
                   jittered_hue(rng, base_bin + dir), jittered_hue(rng, base_bin + 6 + dir)};
      }
      break;
  }

  const bool grid_mode = rng.chance(0.3);
  std::vector<ShapeSpec> elements;
  if (grid_mode) {
    if (palette.size() > 2) palette.resize(2);
    RepetitionGrid g;
    do {
      g.rows = static_cast<int>(rng.range(1, 4));
      g.cols = static_cast<int>(rng.range(1, 4));
    } while (g.rows * g.cols < 2);
    const double cell = 1.0 / std::max(g.rows, g.cols);
    g.motif = sample_shape(rng, cell * 0.95);
    if (g.motif.size < 0.15 || g.motif.size > cell * 0.95) g.motif.size = cell * rng.uniform(0.6, 0.95);
    spec.grid = g;
  } else {
    const auto count = rng.range(1, 4);
    std::vector<int> cells = {0, 1, 2, 3};
    rng.shuffle(cells);
    for (int64_t i = 0; i < count; ++i) {
      auto s = sample_shape(rng, 0.48);
      const double x0 = 0.5 * (cells[static_cast<std::size_t>(i)] % 2);
      const double y0 = 0.5 * (cells[static_cast<std::size_t>(i)] / 2);
      s.cx = rng.uniform(x0 + s.size / 2.0, x0 + 0.5 - s.size / 2.0);
      s.cy = rng.uniform(y0 + s.size / 2.0, y0 + 0.5 - s.size / 2.0);
      spec.shapes.push_back(s);
    }
  }

  // Hue assignment: each palette hue appears at least once among elements and
  // (optionally) the background.
  std::vector<ShapeSpec*> slots;
  for (auto& s : spec.shapes) slots.push_back(&s);
  if (spec.grid) slots.push_back(&spec.grid->motif);
  const bool bg_saturated = palette.size() > slots.size() || rng.chance(0.3);
  if (bg_saturated && slots.size() + 1 < palette.size()) palette.resize(2);
  std::vector<double> order = palette;
  rng.shuffle(order);
  std::size_t next = 0;
  if (bg_saturated) {
    spec.background = saturated(rng, order[next++ % order.size()]);
    spec.background.v = rng.uniform(0.3, 1.0);
  } else {
    spec.background = achromatic(rng);
  }
  std::vector<ShapeSpec*> spare;
  for (auto* s : slots) {
    if (next < order.size()) {
      s->color = saturated(rng, order[next++]);
      continue;
    }
    spare.push_back(s);
    if (rng.chance(0.2)) {
      s->color = achromatic(rng);
    } else {
      s->color = saturated(rng, palette[rng.below(palette.size())]);
    }
  }
  // Occasionally push the value range to its extremes.
  const double mode = rng.uniform();
  if (mode < 0.15) {
    if (!bg_saturated) spec.background.v = rng.uniform(0.0, 0.05);
    for (auto* s : slots) s->color.v = 1.0;
    // a spare element may turn flat white so the value range can span [0,1]
    if (!bg_saturated && !spare.empty() && rng.chance(0.5)) {
      spec.background.v = 0.0;
      spare.front()->color = {0.0, 0.0, 1.0};
      spare.front()->texture = Texture::kFlat;
    }
  } else if (mode < 0.3) {
    const double v = rng.uniform(0.5, 1.0);
    if (!bg_saturated) spec.background.v = v;
    for (auto* s : slots) s->color.v = v;
  }
  return spec;
}

}  // namespace

SceneSpec sample_scene(Rng& rng, int64_t canvas, Harmony harmony, int base_bin) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    auto spec = sample_scene_once(rng, canvas, harmony, base_bin);
    if (well_conditioned(spec) && label_scene(spec).classes[1] == static_cast<int64_t>(harmony)) {
      return spec;
    }
  }
  throw SpecError("could not sample a well-conditioned scene");
}

std::vector<CorpusItem> generate_corpus(int64_t n, std::uint64_t seed, int64_t canvas) {
  if (n < 0) throw ConfigError("corpus size must be non-negative");
  std::vector<CorpusItem> corpus;
  corpus.reserve(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto harmony = static_cast<Harmony>(i % 3);
    const int base_bin = static_cast<int>((i / 3) % static_cast<int64_t>(kHueBins));
    auto spec = sample_scene(rng, canvas, harmony, base_bin);
    auto image = render_scene(spec);
    auto label = label_scene(spec);
    corpus.push_back({std::move(spec), std::move(image), std::move(label)});
  }
  return corpus;
}

LabeledImages to_labeled_images(const std::vector<CorpusItem>& corpus) {
  if (corpus.empty()) return {torch::empty({0, 3, 0, 0}), {}};
  std::vector<torch::Tensor> images;
  LabeledImages out;
  for (const auto& item : corpus) {
    images.push_back(item.image);
    out.labels.push_back(item.label);
  }
  out.images = torch::cat(images, 0);
  return out;
}

std::vector<torch::Tensor> generate_domain(char domain, int64_t n, std::uint64_t seed, int64_t canvas) {
  if (domain != 'A' && domain != 'B') throw ConfigError("domain must be 'A' or 'B'");
  const int bin = domain == 'A' ? 0 : 1;
  std::vector<torch::Tensor> out;
  for (int64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed ^ static_cast<std::uint64_t>(domain), static_cast<std::uint64_t>(i)));
    SceneSpec spec;
    spec.canvas = canvas;
    spec.seed = rng.next();
    spec.background = {0.0, rng.uniform(0.0, 0.08), rng.uniform(0.0, 1.0)};
    std::vector<int> cells = {0, 1, 2, 3};
    rng.shuffle(cells);
    const auto count = rng.range(1, 3);
    for (int64_t k = 0; k < count; ++k) {
      ShapeSpec s;
      s.kind = ShapeKind::kCircle;
      s.texture = static_cast<Texture>(rng.below(kTextures));
      s.size = rng.uniform(0.2, 0.48);
      s.color = saturated(rng, jittered_hue(rng, bin));
      const double x0 = 0.5 * (cells[static_cast<std::size_t>(k)] % 2);
      const double y0 = 0.5 * (cells[static_cast<std::size_t>(k)] / 2);
      s.cx = rng.uniform(x0 + s.size / 2.0, x0 + 0.5 - s.size / 2.0);
      s.cy = rng.uniform(y0 + s.size / 2.0, y0 + 0.5 - s.size / 2.0);
      spec.shapes.push_back(s);
    }
    out.push_back(render_scene(spec));
  }
  return out;
}

}  // namespace acan::synth
