#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coreset/numerics.hpp"

namespace coreset::io {

using numerics::Index;
using numerics::Matrix;
using numerics::Vector;

/// A rectangular numeric table. An optional single header row is
/// detected by its first row failing to parse as numbers.
struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  Matrix values;
};

CsvTable load_csv(const std::string& path);

struct LabeledData {
  Matrix x;
  Vector y;
  Index label_column = 0;
};

/// Split one column out as the response; defaults to the last column.
LabeledData split_label(const CsvTable& table, std::optional<Index> label_column = std::nullopt);

/// Write via a temp file in the same directory plus an atomic rename.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace coreset::io
