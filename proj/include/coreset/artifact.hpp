#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coreset/numerics.hpp"
#include "coreset/regression.hpp"

namespace coreset::io {

using numerics::Index;

inline constexpr const char* kArtifactSchemaVersion = "1";

/// Serializable coreset: selected sample indices with weights, the
/// reduced regularizer diagonal for regression runs, and run metadata.
/// Exactly one of `p` (regression) and `k` (latent variable) is set.
struct CoresetArtifact {
  std::string schema_version = kArtifactSchemaVersion;
  std::vector<Index> indices;
  std::vector<double> weights;
  std::map<Index, double> reg_diag;
  double lambda = 0.0;
  std::optional<int> p;
  std::optional<Index> k;
  Index n = 0;
  Index d = 0;
  Index kernel_rank = 0;
  double sd_bound = 0.0;
  Index selected_count = 0;

  bool is_regression() const { return p.has_value(); }
};

/// Deterministic serialization: fixed key order, floats with 17
/// significant digits so binary64 weights round-trip exactly.
std::string to_json(const CoresetArtifact& artifact);
CoresetArtifact artifact_from_json(const std::string& text);

std::string to_json(const regression::EquivalenceReport& report);

/// One float with 17 significant digits, the format used everywhere a
/// number reaches an output file.
std::string format_double(double value);

}  // namespace coreset::io
