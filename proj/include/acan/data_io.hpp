#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "acan/acan_training.hpp"
#include "acan/image.hpp"
#include "acan/schema.hpp"

namespace acan {

namespace fs = std::filesystem;

struct LabeledItem {
  std::string filename;  // relative to the dataset root
  AttributeLabel label;

  bool operator==(const LabeledItem&) const = default;
};

/// Labelled images listed in a label file. Items are sorted by filename.
struct LabeledDataset {
  fs::path root;
  std::vector<LabeledItem> items;

  int64_t size() const { return static_cast<int64_t>(items.size()); }
  fs::path path_of(std::size_t i) const { return root / items.at(i).filename; }
};

/// Column order of label files.
std::vector<std::string> label_file_columns(const AttributeSchema& schema = AttributeSchema::canonical());

/// Reads a comma-separated label file with one header row. Scalars are reals in [1,10];
/// categorical columns hold class names. Throws DataError if the file is missing and
/// ParseError (naming row and column) for a bad header, field, duplicate filename or,
/// when `check_files` is set, an image missing next to the label file.
LabeledDataset parse_label_file(const fs::path& path,
                                const AttributeSchema& schema = AttributeSchema::canonical(),
                                bool check_files = true);

/// Writes items in their current order with shortest round-trip number formatting.
void write_label_file(const fs::path& path, const LabeledDataset& dataset,
                      const AttributeSchema& schema = AttributeSchema::canonical());

/// Decodes an image file to 1 x 3 x size x size in [0,1] (bilinear resize when the
/// stored size differs). Throws DataError if the file cannot be decoded.
torch::Tensor decode_image(const fs::path& path, int64_t size);

/// decode_image() followed by conversion to the requested range.
ImageBatch preprocess(const fs::path& path, int64_t size, ImageRange range);

/// Several files stacked in the given order.
ImageBatch load_images(const std::vector<fs::path>& paths, int64_t size, ImageRange range);

/// Saves a 3 x H x W or 1 x 3 x H x W image in [0,1] as 8-bit PNG.
void write_png(const fs::path& path, const torch::Tensor& image);

/// Images and labels of a dataset, decoded at `size`.
LabeledImages load_labeled_images(const LabeledDataset& dataset, int64_t size);

/// Unpaired translation layout: root/trainA, root/trainB and optional testA, testB.
struct UnpairedDomains {
  fs::path root;
  std::vector<fs::path> train_a;
  std::vector<fs::path> train_b;
  std::vector<fs::path> test_a;
  std::vector<fs::path> test_b;
};

/// Lists image files of each domain in lexicographic order. Throws DataError when
/// trainA or trainB is missing or empty.
UnpairedDomains load_unpaired(const fs::path& root);

/// Image files (png, jpg, jpeg, bmp) directly inside `dir`, sorted.
std::vector<fs::path> list_images(const fs::path& dir);

/// Visiting order of n items in a given epoch, fixed by (seed, epoch).
std::vector<int64_t> epoch_order(int64_t n, std::uint64_t seed, int64_t epoch);

}  // namespace acan
