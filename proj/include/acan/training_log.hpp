#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace acan {

/// Append-only line-delimited JSON log. Every record gets a "time" field (UTC,
/// ISO 8601). Records carrying "kind" and an index of that name ("step", "epoch")
/// must have strictly increasing indices per kind.
class TrainingLog {
 public:
  /// Opens `path`; existing records are kept when `append` is set, else truncated.
  TrainingLog(const std::filesystem::path& path, bool append);

  /// Throws ConfigError when the record's index does not increase.
  void write(nlohmann::json record);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::map<std::string, int64_t> last_index_;
};

std::vector<nlohmann::json> read_log(const std::filesystem::path& path);

/// Records without their "time" fields, for comparing runs.
std::vector<nlohmann::json> without_timestamps(std::vector<nlohmann::json> records);

}  // namespace acan
