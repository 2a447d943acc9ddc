#include "xychain/report_io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "json.hpp"
#include "xychain/model.hpp"

namespace xychain {

std::string csv_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string csv_int(long long value) { return std::to_string(value); }

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw numerical_error("cannot open output file " + path.string());
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw numerical_error("CSV row width mismatch in " + path_.string());
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw numerical_error("write failed for " + path_.string());
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw numerical_error("cannot read " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[65536];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void write_manifest(const std::filesystem::path& output_dir, const std::string& command,
                    const std::string& config_path, int workers, std::uint64_t seed,
                    const std::string& started, const std::string& finished) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config_path"] = config_path;
  manifest["output_dir"] = output_dir.string();
  manifest["worker_count"] = workers;
  manifest["seed"] = seed;
  manifest["started"] = started;
  manifest["finished"] = finished;

  auto files = nlohmann::json::array();
  std::vector<std::filesystem::path> entries;
  for (const auto& entry : std::filesystem::directory_iterator(output_dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      entries.push_back(entry.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& path : entries) {
    files.push_back({{"name", path.filename().string()},
                     {"bytes", std::filesystem::file_size(path)},
                     {"checksum", "fnv1a64:" + to_hex(fnv1a64_file(path))}});
  }
  files.push_back({{"name", "manifest.json"}, {"checksum", "self"}});
  manifest["files"] = files;

  std::ofstream out(output_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw numerical_error("cannot write manifest");
  out << manifest.dump(2) << '\n';
}

}  // namespace xychain
