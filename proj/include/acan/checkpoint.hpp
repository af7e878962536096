#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "acan/tensor_util.hpp"

namespace acan {

/// Single-file container for metadata plus named tensors.
///
/// Layout (little-endian):
///   "ACANCKPT" u32 version
///   u64 meta_len, meta_len bytes of compact JSON
///   u64 tensor_count, then per tensor in name order:
///     u32 name_len, name, u8 dtype, u32 rank, i64 dims[rank], u64 nbytes, raw bytes
///
/// Serialisation is canonical: save -> load -> save reproduces identical bytes.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json meta = nlohmann::json::object();
  TensorMap tensors;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  /// Writes atomically (temp file + rename). Throws DataError on I/O failure.
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  /// Tensors whose names start with `prefix`, with the prefix removed.
  TensorMap with_prefix(const std::string& prefix) const;
  void insert(const std::string& prefix, const TensorMap& items);
};

}  // namespace acan
