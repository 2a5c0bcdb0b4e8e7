#include "coreset/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace coreset::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& cell, double& out) {
  const std::string trimmed = trim(cell);
  if (trimmed.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(trimmed.c_str(), &end);
  return end == trimmed.c_str() + trimmed.size() && errno == 0;
}

}  // namespace

CsvTable load_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw input_error("cannot open '" + path + "'");
  }

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(line));
  }
  if (rows.empty()) {
    throw input_error("'" + path + "' contains no data");
  }

  CsvTable table;
  std::size_t first_data = 0;
  double probe = 0.0;
  bool header = false;
  for (const std::string& cell : rows[0]) {
    if (!parse_double(cell, probe)) {
      header = true;
      break;
    }
  }
  if (header) {
    for (const std::string& cell : rows[0]) table.header.push_back(trim(cell));
    first_data = 1;
    if (rows.size() == 1) {
      throw input_error("'" + path + "' has a header but no data rows");
    }
  }

  const std::size_t width = rows[first_data].size();
  const std::size_t n = rows.size() - first_data;
  table.values.resize(static_cast<Index>(n), static_cast<Index>(width));
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw input_error("'" + path + "': row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " fields, expected " +
                        std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double value = 0.0;
      if (!parse_double(rows[r][c], value)) {
        throw input_error("'" + path + "': non-numeric cell at row " + std::to_string(r + 1) +
                          ", column " + std::to_string(c + 1));
      }
      table.values(static_cast<Index>(r - first_data), static_cast<Index>(c)) = value;
    }
  }
  return table;
}

LabeledData split_label(const CsvTable& table, std::optional<Index> label_column) {
  const Index cols = table.values.cols();
  if (cols < 2) {
    throw input_error("need at least one feature column and one label column");
  }
  const Index label = label_column.value_or(cols - 1);
  if (label < 0 || label >= cols) {
    throw input_error("label column " + std::to_string(label) + " out of range for " +
                      std::to_string(cols) + " columns");
  }

  LabeledData data;
  data.label_column = label;
  data.y = table.values.col(label);
  data.x.resize(table.values.rows(), cols - 1);
  Index out = 0;
  for (Index c = 0; c < cols; ++c) {
    if (c == label) continue;
    data.x.col(out++) = table.values.col(c);
  }
  return data;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw input_error("cannot write '" + tmp.string() + "'");
    }
    out << content;
    if (!out.flush()) {
      throw input_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    throw input_error("cannot rename '" + tmp.string() + "' to '" + target.string() + "': " +
                      ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw input_error("cannot open '" + path + "'");
  }
  std::ostringstream content;
  content << file.rdbuf();
  return content.str();
}

}  // namespace coreset::io
