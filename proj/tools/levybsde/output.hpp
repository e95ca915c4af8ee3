#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace levybsde::cli {

/// Shortest round-trip text for a double; identical across runs.
std::string fmt(double x);

std::string hex64(std::uint64_t h);

/// Small CSV writer; rows are buffered and written on close().
class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header,
          const std::vector<std::string>& preamble = {});
  void row(const std::vector<std::string>& cells);
  void close();
  ~CsvFile();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Creates the directory if needed.
std::filesystem::path output_dir(const std::string& directory);

}  // namespace levybsde::cli
