#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace hmmfp {

inline constexpr std::string_view kVersion = "0.1.0";

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

/// Shortest round-trip decimal form of a double ("inf"/"nan" spelled out).
std::string format_double(double v);

struct ReportHeader {
  std::uint64_t seed = 0;
  std::string config_hash;

  /// "# hmmfp <version> seed=<seed> config=<hash>"
  std::string line() const;
};

/// Long-format CSV with the report header as its first line.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const ReportHeader& header,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace hmmfp
