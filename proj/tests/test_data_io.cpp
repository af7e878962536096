#include <gtest/gtest.h>
#include <torch/torch.h>

#include "acan/data_io.hpp"
#include "acan/errors.hpp"
#include "acan/random.hpp"
#include "test_util.hpp"

namespace acan {
namespace {

const char* kHeader =
    "filename,variety_of_texture,variety_of_shape,variety_of_size,variety_of_color,contrast,repetition,"
    "primary_color,color_harmony\n";

void touch_png(const fs::path& p, int size = 4, int value = 128) {
  write_png(p, torch::full({3, size, size}, value / 255.0));
}

TEST(LabelFile, Columns) {
  const auto cols = label_file_columns();
  ASSERT_EQ(cols.size(), 9u);
  EXPECT_EQ(cols.front(), "filename");
  EXPECT_EQ(cols.back(), "color_harmony");
}

TEST(LabelFile, MinimalRow) {
  const auto dir = test::scratch_dir();
  touch_png(dir / "a.png");
  test::write_text(dir / "labels.csv", std::string(kHeader) + "a.png,1,1,1,1,1,1,red,monochromatic\n");
  const auto d = parse_label_file(dir / "labels.csv");
  ASSERT_EQ(d.size(), 1);
  EXPECT_EQ(d.items[0].filename, "a.png");
  EXPECT_EQ(d.items[0].label.scalars, std::vector<double>(6, 1.0));
  EXPECT_EQ(d.items[0].label.classes, (std::vector<int64_t>{0, 0}));
  EXPECT_EQ(d.path_of(0), dir / "a.png");
}

TEST(LabelFile, OutOfRangeScalarNamesRowAndColumn) {
  const auto dir = test::scratch_dir();
  touch_png(dir / "a.png");
  touch_png(dir / "b.png");
  test::write_text(dir / "labels.csv", std::string(kHeader) + "a.png,1,1,1,1,1,1,red,monochromatic\n" +
                                           "b.png,1,1,1,1,11,1,red,monochromatic\n");
  try {
    parse_label_file(dir / "labels.csv");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), "contrast");
  }
}

TEST(LabelFile, Errors) {
  const auto dir = test::scratch_dir();
  touch_png(dir / "a.png");
  auto column_of = [&](const std::string& body) -> std::string {
    test::write_text(dir / "labels.csv", body);
    try {
      parse_label_file(dir / "labels.csv");
    } catch (const ParseError& e) {
      return e.column();
    }
    return "<none>";
  };
  EXPECT_EQ(column_of(std::string(kHeader) + "a.png,1,1,1,1,1,1,red,triadic\n"), "color_harmony");
  EXPECT_EQ(column_of(std::string(kHeader) + "a.png,1,1,1,1,1,1,crimson,analogous\n"), "primary_color");
  EXPECT_EQ(column_of(std::string(kHeader) + "a.png,1,x,1,1,1,1,red,analogous\n"), "variety_of_shape");
  EXPECT_EQ(column_of(std::string(kHeader) + "a.png,1,1,1,1,1,red,analogous\n"), "color_harmony");
  EXPECT_EQ(column_of(std::string(kHeader) + "b.png,1,1,1,1,1,1,red,analogous\n"), "filename");
  EXPECT_EQ(column_of(std::string(kHeader) + "a.png,1,1,1,1,1,1,red,analogous\na.png,2,1,1,1,1,1,red,analogous\n"),
            "filename");
  EXPECT_EQ(column_of("filename,contrast\na.png,1\n"), "variety_of_texture");
  EXPECT_THROW(parse_label_file(dir / "nope.csv"), DataError);
}

TEST(LabelFile, RoundTripAndOrdering) {
  const auto dir = test::scratch_dir();
  LabeledDataset d{dir, {}};
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    const std::string name = "img_" + std::to_string((i * 17) % 40) + ".png";
    touch_png(dir / name);
    AttributeLabel l;
    for (int s = 0; s < 6; ++s) l.scalars.push_back(rng.uniform(1.0, 10.0));
    l.scalars[0] = 1.0 + 9.0 * (i % 3) / 7.0;
    l.classes = {static_cast<int64_t>(rng.below(12)), static_cast<int64_t>(rng.below(3))};
    d.items.push_back({name, l});
  }
  std::sort(d.items.begin(), d.items.end(), [](const auto& a, const auto& b) { return a.filename < b.filename; });
  write_label_file(dir / "labels.csv", d);
  const auto back = parse_label_file(dir / "labels.csv");
  EXPECT_EQ(back.items, d.items);

  auto shuffled = d;
  std::reverse(shuffled.items.begin(), shuffled.items.end());
  write_label_file(dir / "reversed.csv", shuffled);
  EXPECT_EQ(parse_label_file(dir / "reversed.csv").items, d.items) << "items come back in filename order";
}

TEST(LabelFile, FiveHundredRows) {
  const auto dir = test::scratch_dir();
  LabeledDataset d{dir, {}};
  for (int i = 0; i < 500; ++i) {
    d.items.push_back({"x" + std::to_string(1000 + i) + ".png", {{1, 2, 3, 4, 5, 6}, {i % 12, i % 3}}});
  }
  write_label_file(dir / "labels.csv", d);
  EXPECT_EQ(parse_label_file(dir / "labels.csv", AttributeSchema::canonical(), false).size(), 500);
}

TEST(Preprocess, EndpointMapping) {
  const auto dir = test::scratch_dir();
  auto img = torch::ones({3, 2, 2});
  img.select(1, 0).select(1, 0).zero_();
  write_png(dir / "e.png", img);
  const auto a = preprocess(dir / "e.png", 2, ImageRange::kAcan).tensor();
  const auto g = preprocess(dir / "e.png", 2, ImageRange::kGenerator).tensor();
  EXPECT_EQ(a[0][0][1][1].item<float>(), 1.0f);
  EXPECT_EQ(g[0][0][1][1].item<float>(), 1.0f);
  EXPECT_EQ(a[0][0][0][0].item<float>(), 0.0f);
  EXPECT_EQ(g[0][0][0][0].item<float>(), -1.0f);
  EXPECT_LE((to_acan_range(to_generator_range(a)) - a).abs().max().item<double>(), 1e-7);
}

TEST(Preprocess, ChannelOrderIsRgb) {
  const auto dir = test::scratch_dir();
  write_png(dir / "r.png", torch::stack({torch::ones({3, 3}), torch::zeros({3, 3}), torch::zeros({3, 3})}));
  const auto x = decode_image(dir / "r.png", 3);
  EXPECT_EQ(x[0][0].min().item<float>(), 1.0f);
  EXPECT_EQ(x[0][2].max().item<float>(), 0.0f);
}

TEST(Preprocess, ResizeOfCorrectSizeIsIdentity) {
  const auto dir = test::scratch_dir();
  torch::manual_seed(1);
  const auto x = (torch::rand({3, 16, 16}) * 255).round() / 255;
  write_png(dir / "x.png", x);
  EXPECT_LE((decode_image(dir / "x.png", 16)[0] - x).abs().max().item<double>(), 1e-6);
  EXPECT_EQ(decode_image(dir / "x.png", 8).sizes(), (std::vector<int64_t>{1, 3, 8, 8}));
}

TEST(Preprocess, UndecodableFileRejected) {
  const auto dir = test::scratch_dir();
  test::write_text(dir / "bad.png", "not an image");
  EXPECT_THROW(decode_image(dir / "bad.png", 8), DataError);
  EXPECT_THROW(decode_image(dir / "missing.png", 8), DataError);
}

TEST(Unpaired, CountsAndOrdering) {
  const auto dir = test::scratch_dir();
  fs::create_directories(dir / "trainA");
  fs::create_directories(dir / "trainB");
  for (const char* n : {"c.png", "a.png", "b.png"}) touch_png(dir / "trainA" / n);
  for (const char* n : {"z.png", "y.jpg"}) touch_png(dir / "trainB" / n);
  test::write_text(dir / "trainB" / "notes.txt", "ignored");
  const auto d = load_unpaired(dir);
  ASSERT_EQ(d.train_a.size(), 3u);
  EXPECT_EQ(d.train_b.size(), 2u);
  EXPECT_EQ(d.train_a[0].filename(), "a.png");
  EXPECT_EQ(d.train_a[2].filename(), "c.png");
  EXPECT_TRUE(d.test_a.empty());
}

TEST(Unpaired, EmptyDomainRejected) {
  const auto dir = test::scratch_dir();
  fs::create_directories(dir / "trainA");
  fs::create_directories(dir / "trainB");
  touch_png(dir / "trainA" / "a.png");
  EXPECT_THROW(load_unpaired(dir), DataError);
  fs::remove_all(dir / "trainB");
  EXPECT_THROW(load_unpaired(dir), DataError);
}

TEST(Unpaired, EpochOrderDependsOnSeedOnly) {
  EXPECT_EQ(epoch_order(20, 3, 5), epoch_order(20, 3, 5));
  EXPECT_NE(epoch_order(20, 3, 5), epoch_order(20, 3, 6));
  EXPECT_NE(epoch_order(20, 3, 5), epoch_order(20, 4, 5));
  auto order = epoch_order(20, 3, 5);
  std::sort(order.begin(), order.end());
  for (int64_t i = 0; i < 20; ++i) EXPECT_EQ(order[i], i);
}

TEST(LabeledImages, LoadedInDatasetOrder) {
  const auto dir = test::scratch_dir();
  touch_png(dir / "a.png", 8, 0);
  touch_png(dir / "b.png", 8, 255);
  LabeledDataset d{dir, {{"a.png", {{1, 1, 1, 1, 1, 1}, {0, 0}}}, {"b.png", {{2, 2, 2, 2, 2, 2}, {1, 1}}}}};
  const auto li = load_labeled_images(d, 8);
  EXPECT_EQ(li.size(), 2);
  EXPECT_EQ(li.images[0].max().item<float>(), 0.0f);
  EXPECT_EQ(li.images[1].min().item<float>(), 1.0f);
  EXPECT_EQ(li.labels[1].classes[0], 1);
}

}  // namespace
}  // namespace acan
