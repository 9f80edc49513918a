#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace pivoting {

// Minimal CSV writing with a leading '#' provenance comment. Numbers are
// formatted with %.17g so re-running a seeded command reproduces files
// byte for byte.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& comment,
            const std::vector<std::string>& header);

  void write_row(const std::vector<std::string>& fields);

  static std::string fmt(double v);
  static std::string fmt(int v);
  static std::string fmt(uint64_t v);

 private:
  std::ofstream os_;
  size_t n_columns_;
};

// Parsed CSV: '#' comment lines are collected separately.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

}  // namespace pivoting
