#include "acan/training_log.hpp"

#include <chrono>
#include <ctime>

#include "acan/errors.hpp"

namespace acan {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

// Index field of a record, if it has one.
bool record_index(const nlohmann::json& r, std::string& kind, int64_t& index) {
  if (!r.contains("kind") || !r["kind"].is_string()) return false;
  kind = r["kind"].get<std::string>();
  if (!r.contains(kind) || !r[kind].is_number_integer()) return false;
  index = r[kind].get<int64_t>();
  return true;
}

}  // namespace

TrainingLog::TrainingLog(const std::filesystem::path& path, bool append) : path_(path) {
  if (append && std::filesystem::exists(path)) {
    for (const auto& r : read_log(path)) {
      std::string kind;
      int64_t index = 0;
      if (record_index(r, kind, index)) last_index_[kind] = index;
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw DataError("cannot open log " + path.string());
}

void TrainingLog::write(nlohmann::json record) {
  std::string kind;
  int64_t index = 0;
  if (record_index(record, kind, index)) {
    const auto it = last_index_.find(kind);
    if (it != last_index_.end() && index <= it->second) {
      throw ConfigError("log " + kind + " index " + std::to_string(index) + " does not increase");
    }
    last_index_[kind] = index;
  }
  record["time"] = utc_now();
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw DataError("failed writing log " + path_.string());
}

std::vector<nlohmann::json> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log " + path.string());
  std::vector<nlohmann::json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error&) {
      throw DataError("malformed log line in " + path.string());
    }
  }
  return records;
}

std::vector<nlohmann::json> without_timestamps(std::vector<nlohmann::json> records) {
  for (auto& r : records) r.erase("time");
  return records;
}

}  // namespace acan
