#include <cmath>
#include <set>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "acan/errors.hpp"
#include "acan/synthetic.hpp"

namespace acan::synth {
namespace {

SceneSpec gray_scene(int64_t canvas = 32) {
  SceneSpec s;
  s.canvas = canvas;
  s.background = {0.0, 0.0, 0.5};
  return s;
}

// Vertical bands of fully saturated colours, one per hue.
torch::Tensor hue_card(const std::vector<double>& hues, double value = 1.0, int64_t size = 48) {
  SceneSpec s = gray_scene(size);
  s.background = {0.0, 0.0, 0.0};
  auto img = torch::zeros({1, 3, size, size});
  const int64_t n = static_cast<int64_t>(hues.size());
  for (int64_t k = 0; k < n; ++k) {
    ShapeSpec band;
    band.kind = ShapeKind::kSquare;
    band.color = {hues[k], 1.0, value};
    SceneSpec one = s;
    one.background = band.color;
    const auto colour = render_scene(one);
    const int64_t x0 = k * size / n, x1 = (k + 1) * size / n;
    img.narrow(3, x0, x1 - x0).copy_(colour.narrow(3, x0, x1 - x0));
  }
  return img;
}

TEST(Render, EmptySceneIsConstant) {
  const auto img = render_scene(gray_scene());
  EXPECT_EQ(img.sizes(), (std::vector<int64_t>{1, 3, 32, 32}));
  EXPECT_EQ((img - img[0][0][0][0]).abs().max().item<double>(), 0.0);
  EXPECT_DOUBLE_EQ(measure_contrast(img), 1.0);
}

TEST(Render, Deterministic) {
  Rng rng(3);
  const auto spec = sample_scene(rng, 48, Harmony::kAnalogous, 4);
  EXPECT_TRUE(torch::equal(render_scene(spec), render_scene(spec)));
}

TEST(Render, GridMotifsAreCongruent) {
  SceneSpec s = gray_scene(48);
  RepetitionGrid g;
  g.motif.kind = ShapeKind::kTriangle;
  g.motif.size = 0.2;
  g.motif.color = {120.0, 0.9, 0.8};
  g.motif.texture = Texture::kStripes;
  g.rows = 3;
  g.cols = 3;
  s.grid = g;
  const auto img = render_scene(s)[0];
  const int64_t cell = 48 / 3;
  const auto first = img.narrow(1, 0, cell).narrow(2, 0, cell);
  int differing_from_background = 0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const auto tile = img.narrow(1, r * cell, cell).narrow(2, c * cell, cell);
      EXPECT_TRUE(torch::equal(tile, first)) << "cell " << r << "," << c;
    }
  }
  differing_from_background = (first - 0.5).abs().sum(0).gt(1e-6).sum().item<int>();
  EXPECT_GT(differing_from_background, 10);
}

TEST(Render, ShapesLeavingCanvasRejected) {
  SceneSpec s = gray_scene();
  ShapeSpec shape;
  shape.size = 0.5;
  shape.cx = 0.1;
  s.shapes.push_back(shape);
  EXPECT_THROW(render_scene(s), SpecError);
  s.shapes[0].cx = 0.5;
  s.shapes[0].color.h = 360.0;
  EXPECT_THROW(s.validate(), SpecError);
  s.shapes[0].color.h = 0.0;
  s.shapes[0].size = 0.0;
  EXPECT_THROW(s.validate(), SpecError);
}

TEST(Rubric, Buckets) {
  EXPECT_EQ(hue_bin(0.0), 0);
  EXPECT_EQ(hue_bin(14.9), 0);
  EXPECT_EQ(hue_bin(15.0), 1);
  EXPECT_EQ(hue_bin(350.0), 0);
  EXPECT_EQ(hue_bin(344.9), 11);
  EXPECT_EQ(size_bucket(0.1), 0);
  EXPECT_EQ(size_bucket(0.3), 1);
  EXPECT_EQ(size_bucket(0.4), 2);
  EXPECT_EQ(size_bucket(0.9), 3);
  EXPECT_EQ(variety_rating(1, 4), 1.0);
  EXPECT_EQ(variety_rating(4, 4), 10.0);
  EXPECT_EQ(variety_rating(7, 4), 10.0);
  EXPECT_EQ(variety_rating(2, 3), 5.5);
}

TEST(Rubric, HarmonyTemplates) {
  EXPECT_EQ(classify_harmony({}), Harmony::kMonochromatic);
  EXPECT_EQ(classify_harmony({200.0}), Harmony::kMonochromatic);
  EXPECT_EQ(classify_harmony({10.0, 25.0, 40.0}), Harmony::kAnalogous);
  EXPECT_EQ(classify_harmony({0.0, 180.0}), Harmony::kComplementary);
  EXPECT_EQ(classify_harmony({350.0, 20.0}), Harmony::kAnalogous);
  EXPECT_EQ(classify_harmony({0.0, 5.0, 185.0}), Harmony::kComplementary);
  EXPECT_FALSE(classify_harmony({0.0, 120.0, 240.0}).has_value());
  EXPECT_FALSE(classify_harmony({0.0, 90.0}).has_value());
}

TEST(Label, SingleRedCircle) {
  SceneSpec s = gray_scene();
  s.background = {0.0, 0.0, 0.0};
  ShapeSpec c;
  c.color = {0.0, 1.0, 1.0};
  s.shapes.push_back(c);
  const auto l = label_scene(s);
  EXPECT_EQ(l.scalars[attr::kVarietyOfShape], 1.0);
  EXPECT_EQ(l.scalars[attr::kVarietyOfColor], 1.0);
  EXPECT_EQ(l.classes[0], 0);
  EXPECT_EQ(l.classes[1], static_cast<int64_t>(Harmony::kMonochromatic));
  EXPECT_NO_THROW(l.validate(AttributeSchema::canonical()));
}

TEST(Label, ComplementaryEqualAreas) {
  SceneSpec s = gray_scene(48);
  ShapeSpec left, right;
  left.kind = right.kind = ShapeKind::kSquare;
  left.size = right.size = 0.3;
  left.color = {0.0, 1.0, 1.0};
  right.color = {180.0, 1.0, 1.0};
  left.cx = 0.25;
  right.cx = 0.75;
  s.shapes = {left, right};
  const auto l = label_scene(s);
  EXPECT_EQ(l.classes[1], static_cast<int64_t>(Harmony::kComplementary));
  EXPECT_EQ(l.classes[0], 0) << "equal areas tie towards the lower bin";
}

TEST(Label, AnalogousTriple) {
  SceneSpec s = gray_scene(48);
  for (double h : {10.0, 25.0, 40.0}) {
    ShapeSpec c;
    c.size = 0.2;
    c.color = {h, 0.9, 0.9};
    c.cx = 0.2 + h / 60.0;
    s.shapes.push_back(c);
  }
  EXPECT_EQ(label_scene(s).classes[1], static_cast<int64_t>(Harmony::kAnalogous));
}

TEST(Label, NoTemplateRejected) {
  SceneSpec s = gray_scene(48);
  for (double h : {0.0, 120.0, 240.0}) {
    ShapeSpec c;
    c.size = 0.2;
    c.color = {h, 0.9, 0.9};
    c.cx = 0.2 + h / 400.0;
    s.shapes.push_back(c);
  }
  EXPECT_THROW(label_scene(s), SpecError);
}

TEST(Contrast, HalfBlackHalfWhite) {
  auto img = torch::zeros({1, 3, 20, 20});
  img.narrow(3, 10, 10).fill_(1.0);
  EXPECT_DOUBLE_EQ(measure_contrast(img), 10.0);
}

TEST(Contrast, GrayImagesIgnoreHueRotation) {
  // Grey levels carry no hue; rotating the hue of a grey image leaves it unchanged.
  auto img = torch::zeros({3, 16, 16});
  for (int64_t x = 0; x < 16; ++x) img.select(2, x).fill_(x / 15.0);
  const double c = measure_contrast(img);
  EXPECT_GT(c, 1.0);
  SceneSpec s = gray_scene(16);
  s.background = {240.0, 0.0, 0.3};
  SceneSpec t = s;
  t.background.h = 0.0;
  EXPECT_DOUBLE_EQ(measure_contrast(render_scene(s)), measure_contrast(render_scene(t)));
}

TEST(Contrast, FlipAndRotationInvariant) {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const auto img = render_scene(sample_scene(rng, 40, static_cast<Harmony>(seed % 3), seed));
    const double c = measure_contrast(img);
    EXPECT_EQ(measure_contrast(img.flip({3})), c);
    EXPECT_EQ(measure_contrast(img.flip({2})), c);
    EXPECT_EQ(measure_contrast(img.rot90(1, {2, 3})), c);
    EXPECT_EQ(measure_contrast(img.rot90(3, {2, 3})), c);
  }
}

TEST(Contrast, RobustToSinglePixelOutliers) {
  auto img = torch::full({1, 3, 20, 20}, 0.5);
  img[0][0][0][0] = 1.0;
  img[0][1][0][0] = 1.0;
  img[0][2][0][0] = 1.0;
  EXPECT_DOUBLE_EQ(measure_contrast(img), 1.0);
}

TEST(ColorVariety, Cards) {
  EXPECT_EQ(measure_color_variety(render_scene(gray_scene())), 1.0);
  std::vector<double> all;
  for (int i = 0; i < 12; ++i) all.push_back(30.0 * i);
  EXPECT_EQ(measure_color_variety(hue_card(all)), 10.0);
  EXPECT_EQ(measure_color_variety(hue_card({0.0})), 1.0);
}

TEST(ColorVariety, MonotoneAsHuesAreAdded) {
  std::vector<double> hues;
  double previous = 0.0;
  for (int i = 0; i < 12; ++i) {
    hues.push_back(30.0 * ((i * 5) % 12));
    const double v = measure_color_variety(hue_card(hues));
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(PrimaryColor, CardsAndRotation) {
  EXPECT_EQ(measure_primary_color(hue_card({0.0})), 0);
  for (int b = 0; b < 12; ++b) {
    const auto card = hue_card({30.0 * b, 30.0 * b, 30.0 * ((b + 3) % 12)});
    const auto rotated = hue_card({30.0 * ((b + 4) % 12), 30.0 * ((b + 4) % 12), 30.0 * ((b + 7) % 12)});
    EXPECT_EQ(measure_primary_color(card), b);
    EXPECT_EQ(measure_primary_color(rotated), (measure_primary_color(card) + 4) % 12);
  }
}

TEST(PrimaryColor, TieGoesToLowerBin) {
  EXPECT_EQ(measure_primary_color(hue_card({150.0, 60.0})), 2);
  EXPECT_EQ(measure_primary_color(hue_card({60.0, 150.0})), 2);
}

TEST(Harmony, ImageMeasure) {
  EXPECT_EQ(measure_harmony(render_scene(gray_scene())), static_cast<int64_t>(Harmony::kMonochromatic));
  EXPECT_EQ(measure_harmony(hue_card({0.0, 180.0})), static_cast<int64_t>(Harmony::kComplementary));
  EXPECT_EQ(measure_harmony(hue_card({90.0, 120.0})), static_cast<int64_t>(Harmony::kAnalogous));
}

TEST(Harmony, BrightnessScalingKeepsClass) {
  for (int i = 0; i < 30; ++i) {
    Rng rng(static_cast<std::uint64_t>(100 + i));
    const auto img = render_scene(sample_scene(rng, 48, static_cast<Harmony>(i % 3), i % 12));
    EXPECT_EQ(measure_harmony(img * 0.5), measure_harmony(img)) << "scene " << i;
  }
}

TEST(Measures, Pure) {
  Rng rng(9);
  const auto img = render_scene(sample_scene(rng, 48, Harmony::kComplementary, 2));
  const auto copy = img.clone();
  EXPECT_EQ(measure_contrast(img), measure_contrast(copy));
  EXPECT_EQ(measure_color_variety(img), measure_color_variety(copy));
  EXPECT_EQ(measure_primary_color(img), measure_primary_color(copy));
  EXPECT_EQ(measure_harmony(img), measure_harmony(copy));
  EXPECT_TRUE(torch::equal(img, copy));
}

TEST(Measures, PrimaryColorEquivariesOnSaturatedScenes) {
  for (int i = 0; i < 12; ++i) {
    SceneSpec s = gray_scene(48);
    s.background = {0.0, 0.0, 0.1};
    ShapeSpec big, small;
    big.kind = ShapeKind::kSquare;
    big.size = 0.45;
    big.cx = 0.3;
    big.color = {30.0 * i, 1.0, 1.0};
    small.size = 0.3;
    small.cx = 0.75;
    small.color = {30.0 * ((i + 1) % 12), 1.0, 1.0};
    s.shapes = {big, small};
    const auto base = measure_primary_color(render_scene(s));
    for (int k = 1; k < 12; ++k) {
      SceneSpec r = s;
      for (auto& shape : r.shapes) shape.color.h = std::fmod(shape.color.h + 30.0 * k, 360.0);
      EXPECT_EQ(measure_primary_color(render_scene(r)), (base + k) % 12);
    }
  }
}

// Oracle consistency on a sample; the full 500-scene sweep is an acceptance criterion.
TEST(Oracle, AgreesWithLabels) {
  for (const auto& item : generate_corpus(60, 77, 64)) {
    const auto& l = item.label;
    EXPECT_EQ(measure_primary_color(item.image), l.classes[0]);
    EXPECT_EQ(measure_harmony(item.image), l.classes[1]);
    EXPECT_LE(std::abs(measure_contrast(item.image) - l.scalars[attr::kContrast]), 1.0);
    EXPECT_LE(std::abs(measure_color_variety(item.image) - l.scalars[attr::kVarietyOfColor]), 1.0);
  }
}

TEST(Corpus, CoverageOnPinnedSeed) {
  const auto corpus = generate_corpus(500, 7);
  ASSERT_EQ(corpus.size(), 500u);
  int harmony[3] = {0, 0, 0};
  std::set<int64_t> primaries;
  double min_contrast = 10, max_contrast = 1;
  for (const auto& item : corpus) {
    ++harmony[item.label.classes[1]];
    primaries.insert(item.label.classes[0]);
    min_contrast = std::min(min_contrast, item.label.scalars[attr::kContrast]);
    max_contrast = std::max(max_contrast, item.label.scalars[attr::kContrast]);
    EXPECT_NO_THROW(item.label.validate(AttributeSchema::canonical()));
  }
  for (int c : harmony) EXPECT_GE(c, 50);
  EXPECT_EQ(primaries.size(), 12u);
  EXPECT_LT(min_contrast, 2.0);
  EXPECT_GT(max_contrast, 9.0);
  for (std::size_t s = 0; s < 6; ++s) {
    double lo = 10, hi = 1;
    for (const auto& item : corpus) {
      lo = std::min(lo, item.label.scalars[s]);
      hi = std::max(hi, item.label.scalars[s]);
    }
    EXPECT_NEAR(lo, 1.0, 1e-9) << "scalar " << s;
    EXPECT_NEAR(hi, 10.0, 1e-9) << "scalar " << s;
  }
}

TEST(Corpus, EmptyAndDeterministic) {
  EXPECT_TRUE(generate_corpus(0, 7).empty());
  const auto a = generate_corpus(6, 4, 32), b = generate_corpus(6, 4, 32);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(torch::equal(a[i].image, b[i].image));
    EXPECT_EQ(a[i].label, b[i].label);
  }
}

TEST(Domains, RedAndOrangeCircles) {
  const auto a = generate_domain('A', 6, 1, 32);
  const auto b = generate_domain('B', 6, 1, 32);
  ASSERT_EQ(a.size(), 6u);
  for (const auto& img : a) EXPECT_EQ(measure_primary_color(img), 0);
  for (const auto& img : b) EXPECT_EQ(measure_primary_color(img), 1);
  EXPECT_THROW(generate_domain('C', 1, 1, 32), ConfigError);
}

}  // namespace
}  // namespace acan::synth
