#include "output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace levybsde::cli {

std::string fmt(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CsvFile::CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::string>& preamble)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (const auto& line : preamble) out_ << "# " << line << '\n';
  row(header);
}

void CsvFile::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvFile::close() {
  if (out_.is_open()) {
    out_.close();
    if (out_.fail()) throw std::runtime_error("write failed: " + path_.string());
  }
}

CsvFile::~CsvFile() {
  if (out_.is_open()) out_.close();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::filesystem::path output_dir(const std::string& directory) {
  std::filesystem::path p(directory);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace levybsde::cli
