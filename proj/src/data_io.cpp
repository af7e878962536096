#include "acan/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "acan/errors.hpp"
#include "acan/random.hpp"

namespace acan {

namespace {

constexpr const char* kFilenameColumn = "filename";

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::string> label_file_columns(const AttributeSchema& schema) {
  std::vector<std::string> cols{kFilenameColumn};
  for (const auto& a : schema.attributes()) cols.push_back(a.name);
  return cols;
}

LabeledDataset parse_label_file(const fs::path& path, const AttributeSchema& schema, bool check_files) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  const std::string file = path.string();
  const auto columns = label_file_columns(schema);

  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++row;
    have_header = line.find_first_not_of(" \t\r") != std::string::npos;
  }
  if (!have_header) throw ParseError(file, row, kFilenameColumn, "missing header row");
  const auto header = split_row(line);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c >= header.size()) throw ParseError(file, row, columns[c], "missing column");
    if (header[c] != columns[c]) {
      throw ParseError(file, row, columns[c], "expected column '" + columns[c] + "', found '" + header[c] + "'");
    }
  }
  if (header.size() > columns.size()) {
    throw ParseError(file, row, header[columns.size()], "unexpected extra column");
  }

  LabeledDataset ds;
  ds.root = path.parent_path();
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_row(line);
    if (fields.size() < columns.size()) throw ParseError(file, row, columns[fields.size()], "missing field");
    if (fields.size() > columns.size()) throw ParseError(file, row, columns.back(), "too many fields");

    LabeledItem item;
    item.filename = fields[0];
    if (item.filename.empty()) throw ParseError(file, row, kFilenameColumn, "empty filename");
    if (!seen.insert(item.filename).second) {
      throw ParseError(file, row, kFilenameColumn, "duplicate filename '" + item.filename + "'");
    }
    if (check_files && !fs::is_regular_file(ds.root / item.filename)) {
      throw ParseError(file, row, kFilenameColumn, "image file '" + item.filename + "' not found");
    }
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const auto& def = schema.at(a);
      const auto& text = fields[a + 1];
      if (def.is_scalar()) {
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
          throw ParseError(file, row, def.name, "'" + text + "' is not a number");
        }
        if (!(v >= kScalarMin && v <= kScalarMax)) {
          throw ParseError(file, row, def.name, "value " + text + " outside [1, 10]");
        }
        item.label.scalars.push_back(v);
      } else {
        const auto idx = def.class_index(text);
        if (!idx) throw ParseError(file, row, def.name, "unknown class '" + text + "'");
        item.label.classes.push_back(*idx);
      }
    }
    ds.items.push_back(std::move(item));
  }
  std::sort(ds.items.begin(), ds.items.end(),
            [](const LabeledItem& a, const LabeledItem& b) { return a.filename < b.filename; });
  return ds;
}

void write_label_file(const fs::path& path, const LabeledDataset& dataset, const AttributeSchema& schema) {
  std::ostringstream out;
  const auto columns = label_file_columns(schema);
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& item : dataset.items) {
    if (item.filename.find_first_of(",\n\r") != std::string::npos) {
      throw DataError("filename '" + item.filename + "' cannot be stored in a label file");
    }
    item.label.validate(schema);
    out << item.filename;
    std::size_t s = 0, k = 0;
    for (const auto& def : schema.attributes()) {
      out << ',';
      if (def.is_scalar()) {
        out << format_number(item.label.scalars[s++]);
      } else {
        out << def.classes[static_cast<std::size_t>(item.label.classes[k++])];
      }
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write label file " + path.string());
  f << out.str();
  if (!f) throw DataError("failed writing label file " + path.string());
}

torch::Tensor decode_image(const fs::path& path, int64_t size) {
  if (size <= 0) throw ConfigError("image size must be positive");
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot decode image " + path.string());
  if (bgr.rows != size || bgr.cols != size) {
    cv::Mat resized;
    cv::resize(bgr, resized, cv::Size(static_cast<int>(size), static_cast<int>(size)), 0, 0,
               cv::INTER_LINEAR);
    bgr = resized;
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  auto t = torch::from_blob(rgb.data, {size, size, 3}, torch::kUInt8).clone();
  return t.permute({2, 0, 1}).to(torch::kFloat32).div(255.0).unsqueeze(0).contiguous();
}

ImageBatch preprocess(const fs::path& path, int64_t size, ImageRange range) {
  auto t = decode_image(path, size);
  return range == ImageRange::kAcan ? ImageBatch(t, range) : ImageBatch(to_generator_range(t), range);
}

ImageBatch load_images(const std::vector<fs::path>& paths, int64_t size, ImageRange range) {
  if (paths.empty()) throw DataError("no images to load");
  std::vector<ImageBatch> parts;
  parts.reserve(paths.size());
  for (const auto& p : paths) parts.push_back(preprocess(p, size, range));
  return ImageBatch::concat(parts);
}

void write_png(const fs::path& path, const torch::Tensor& image) {
  auto t = image.detach().to(torch::kCPU, torch::kFloat32);
  if (t.dim() == 4 && t.size(0) == 1) t = t.squeeze(0);
  if (t.dim() != 3 || t.size(0) != 3) throw InputError("write_png expects a 3 x H x W image");
  auto bytes = t.clamp(0.0, 1.0).mul(255.0).round().to(torch::kUInt8).permute({1, 2, 0}).contiguous();
  cv::Mat rgb(static_cast<int>(bytes.size(0)), static_cast<int>(bytes.size(1)), CV_8UC3, bytes.data_ptr());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw DataError("cannot write image " + path.string());
}

LabeledImages load_labeled_images(const LabeledDataset& dataset, int64_t size) {
  if (dataset.items.empty()) throw DataError("dataset is empty");
  std::vector<fs::path> paths;
  LabeledImages out;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    paths.push_back(dataset.path_of(i));
    out.labels.push_back(dataset.items[i].label);
  }
  out.images = load_images(paths, size, ImageRange::kAcan).tensor();
  return out;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  static const std::set<std::string> kExtensions = {".png", ".jpg", ".jpeg", ".bmp"};
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (kExtensions.count(ext)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

UnpairedDomains load_unpaired(const fs::path& root) {
  UnpairedDomains d;
  d.root = root;
  d.train_a = list_images(root / "trainA");
  d.train_b = list_images(root / "trainB");
  d.test_a = list_images(root / "testA");
  d.test_b = list_images(root / "testB");
  if (d.train_a.empty()) throw DataError("domain directory " + (root / "trainA").string() + " is missing or empty");
  if (d.train_b.empty()) throw DataError("domain directory " + (root / "trainB").string() + " is missing or empty");
  return d;
}

std::vector<int64_t> epoch_order(int64_t n, std::uint64_t seed, int64_t epoch) {
  return seeded_permutation(n, seed, static_cast<std::uint64_t>(epoch));
}

}  // namespace acan
