#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace xychain {

/// Fixed-format floating-point cell: 17 significant digits, C locale, so
/// identical runs produce byte-identical CSV files.
std::string csv_double(double value);
std::string csv_int(long long value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  size_t columns_ = 0;
};

std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string to_hex(std::uint64_t value);
std::string utc_timestamp();

/// Writes manifest.json listing every file in the output directory with a
/// content checksum, plus the run metadata.
void write_manifest(const std::filesystem::path& output_dir, const std::string& command,
                    const std::string& config_path, int workers, std::uint64_t seed,
                    const std::string& started, const std::string& finished);

}  // namespace xychain
