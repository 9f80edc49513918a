#include "pivoting/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pivoting {

CsvWriter::CsvWriter(const std::string& path, const std::string& comment,
                     const std::vector<std::string>& header)
    : os_(path), n_columns_(header.size()) {
  if (!os_) throw std::runtime_error("cannot open CSV for writing: " + path);
  if (!comment.empty()) os_ << "# " << comment << "\n";
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != n_columns_)
    throw std::invalid_argument("CSV row width mismatch");
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << fields[i];
  }
  os_ << '\n';
  if (!os_) throw std::runtime_error("CSV write failed");
}

std::string CsvWriter::fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::fmt(int v) { return std::to_string(v); }
std::string CsvWriter::fmt(uint64_t v) { return std::to_string(v); }

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open CSV: " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (!have_header) {
      table.header = fields;
      have_header = true;
    } else {
      table.rows.push_back(fields);
    }
  }
  return table;
}

}  // namespace pivoting
