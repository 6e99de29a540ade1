#include "chaoscorr/csv.hpp"

#include <cstdio>
#include <sstream>

#include "chaoscorr/errors.hpp"

namespace chaoscorr {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::string>& comments)
    : path_(path), n_columns_(header.size()) {
  require(!header.empty(), "CsvWriter: empty header");
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& c : comments) out_ << "# " << c << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  require(cells.size() == n_columns_, "CsvWriter: row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const auto* d = std::get_if<double>(&cells[i]))
      out_ << format_real(*d);
    else
      out_ << std::get<std::int64_t>(cells[i]);
  }
  out_ << '\n';
  if (!out_) throw IoError("write failed on " + path_.string());
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("close failed on " + path_.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string field;
    if (!have_header) {
      while (std::getline(ss, field, ',')) t.header.push_back(field);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw IoError("non-numeric field '" + field + "' in " + path.string());
      }
    }
    if (row.size() != t.header.size()) throw IoError("ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError("missing header in " + path.string());
  return t;
}

}  // namespace chaoscorr
