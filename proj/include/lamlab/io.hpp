#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lamlab::io {

/// Shortest round-trip decimal representation of a double.
/// All emitted files use this so identical inputs produce identical bytes.
std::string fmt(double x);
std::string fmt(int x);
std::string fmt(std::int64_t x);

/// Row-oriented CSV writer with a fixed header.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(std::vector<std::string> cells);
  std::string str() const;
  void save(const std::filesystem::path& path) const;

private:
  std::size_t columns_;
  std::string body_;
};

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

/// Split a CSV line on commas (no quoting; our tables never need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lamlab::io
