#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pytype/partition.hpp"

namespace pytype::cli {

/// Bad flags or flag values. Maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input, refused overwrite. Maps to exit code 1.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputDigest {
  std::string path;
  std::string sha256;
  std::uint64_t bytes = 0;
  nlohmann::json to_json() const { return {{"path", path}, {"sha256", sha256}, {"bytes", bytes}}; }
};

std::string read_file(const std::string& path);
std::string sha256_hex(const std::string& data);
InputDigest digest_of(const std::string& path, const std::string& contents);

/// Sample data loaded from a species CSV, an occupancy CSV or a stats JSON file.
struct LoadedSample {
  PartitionStats stats;
  LabeledCounts labeled;  // empty for stats JSON input
  std::string format;     // "species_csv", "occupancy_csv", "stats_json"
  InputDigest digest;
};

LoadedSample load_sample(const std::string& path);

/// Throws IoError when path exists and force is false.
void ensure_writable(const std::string& path, bool force);
void write_text(const std::string& path, const std::string& text, bool force);

/// JSON dump with a trailing newline, or to stdout when path is empty.
void emit_json(const nlohmann::json& j, const std::string& path, bool force);

}  // namespace pytype::cli
