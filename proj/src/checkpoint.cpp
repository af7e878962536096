#include "acan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "acan/errors.hpp"

namespace acan {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'A', 'C', 'A', 'N', 'C', 'K', 'P', 'T'};

enum class DtypeCode : std::uint8_t { kFloat32 = 0, kFloat64 = 1, kInt64 = 2, kUInt8 = 3 };

DtypeCode code_of(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32:
      return DtypeCode::kFloat32;
    case torch::kFloat64:
      return DtypeCode::kFloat64;
    case torch::kInt64:
      return DtypeCode::kInt64;
    case torch::kUInt8:
      return DtypeCode::kUInt8;
    default:
      throw DataError(std::string("unsupported tensor dtype ") + c10::toString(t));
  }
}

torch::ScalarType type_of(DtypeCode c) {
  switch (c) {
    case DtypeCode::kFloat32:
      return torch::kFloat32;
    case DtypeCode::kFloat64:
      return torch::kFloat64;
    case DtypeCode::kInt64:
      return torch::kInt64;
    case DtypeCode::kUInt8:
      return torch::kUInt8;
  }
  throw DataError("unknown dtype code in checkpoint");
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }

  const char* take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw DataError("truncated checkpoint");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  const auto meta_text = meta.dump();
  put<std::uint64_t>(out, meta_text.size());
  out += meta_text;
  put<std::uint64_t>(out, tensors.size());
  for (const auto& [name, tensor] : tensors) {
    auto t = tensor.detach().contiguous().cpu();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(code_of(t.scalar_type())));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
    for (auto d : t.sizes()) put<std::int64_t>(out, d);
    const auto nbytes = static_cast<std::uint64_t>(t.numel() * t.element_size());
    put<std::uint64_t>(out, nbytes);
    out.append(static_cast<const char*>(t.data_ptr()), nbytes);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  const auto meta_len = r.get<std::uint64_t>();
  try {
    ck.meta = nlohmann::json::parse(std::string(r.take(meta_len), meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint metadata: ") + e.what());
  }
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>();
    std::string name(r.take(name_len), name_len);
    const auto dtype = type_of(static_cast<DtypeCode>(r.get<std::uint8_t>()));
    const auto rank = r.get<std::uint32_t>();
    std::vector<int64_t> dims(rank);
    for (auto& d : dims) d = r.get<std::int64_t>();
    const auto nbytes = r.get<std::uint64_t>();
    auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    if (static_cast<std::uint64_t>(t.numel() * t.element_size()) != nbytes) {
      throw DataError("tensor '" + name + "' has an inconsistent byte count");
    }
    std::memcpy(t.data_ptr(), r.take(nbytes), nbytes);
    ck.tensors.emplace(std::move(name), std::move(t));
  }
  if (!r.done()) throw DataError("trailing bytes after checkpoint");
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    const auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint '" + path + "'");
  }
  fs::rename(tmp, target);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

TensorMap Checkpoint::with_prefix(const std::string& prefix) const {
  TensorMap out;
  for (auto it = tensors.lower_bound(prefix); it != tensors.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.emplace(it->first.substr(prefix.size()), it->second);
  }
  return out;
}

void Checkpoint::insert(const std::string& prefix, const TensorMap& items) {
  for (const auto& [name, t] : items) tensors[prefix + name] = t;
}

}  // namespace acan
