#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xbar/common.hpp"

namespace xbar {

/// Numeric CSV matrix, row-major. Parse errors carry file and line number.
struct CsvMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
};

CsvMatrix load_csv_matrix(const std::filesystem::path& path);
std::vector<double> load_csv_vector(const std::filesystem::path& path);
void write_csv_matrix(const CsvMatrix& m, const std::filesystem::path& path);
void write_csv_vector(const std::vector<double>& v, const std::filesystem::path& path);

/// Flat "key = value" config file with '#' comments.
class KvConfig {
public:
  KvConfig() = default;
  static KvConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& source_path() const { return source_path_; }
  /// FNV-1a hash of the file content, for run manifests.
  std::uint64_t content_hash() const { return content_hash_; }

private:
  std::map<std::string, std::string> values_;
  std::string source_path_;
  std::uint64_t content_hash_ = 0;
};

/// Writes the reproducibility manifest for a run: config hash, seed, version.
void write_manifest(const std::filesystem::path& path, const KvConfig& config,
                    std::uint64_t seed, const std::string& command);

inline constexpr const char* kVersion = "0.1.0";

std::string format_double(double v); ///< shortest round-trip-safe formatting

} // namespace xbar
