#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace chaoscorr {

/// Reals print as %.16e (17 significant digits), integers verbatim.
using CsvCell = std::variant<double, std::int64_t>;

std::string format_real(double x);

class CsvWriter {
 public:
  /// Opens `path` for writing (parent directories are created). Lines in
  /// `comments` are emitted first, each prefixed with "# ".
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
            const std::vector<std::string>& comments = {});

  void row(const std::vector<CsvCell>& cells);
  std::size_t columns() const { return n_columns_; }
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t n_columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with one header line; '#' lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace chaoscorr
