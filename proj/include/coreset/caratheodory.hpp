#pragma once

#include <vector>

#include "coreset/kernelization.hpp"
#include "coreset/numerics.hpp"

namespace coreset::caratheodory {

using numerics::Index;
using numerics::Matrix;
using numerics::Vector;

/// Points with strictly positive weights. Zero-weight rows are stripped
/// on construction; `source_indices` maps stored rows back to the rows
/// of the matrix the set was created from.
struct WeightedPointSet {
  Matrix points;   // n x m
  Vector weights;  // n, all > 0
  std::vector<Index> source_indices;

  static WeightedPointSet create(Matrix points, Vector weights);

  /// All-ones weights over every row.
  static WeightedPointSet uniform(Matrix points);

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

/// A sparse reweighting of the input: distinct ascending row indices
/// with strictly positive weights whose weighted sum reproduces the
/// input's weighted sum.
struct CoresetSelection {
  std::vector<Index> indices;
  Vector weights;

  Index size() const { return static_cast<Index>(indices.size()); }
};

/// Exact Caratheodory reduction: repeatedly cancels affine dependences
/// among the points until at most rank+1 survive. Preserves the weighted
/// sum and the total weight.
CoresetSelection caratheodory_reduce(const WeightedPointSet& p);

/// Clustered variant: reduces weighted cluster means, keeps members of
/// surviving clusters, and recurses; a final plain reduction polishes the
/// survivors down to rank+1. Same contracts as caratheodory_reduce.
CoresetSelection fast_caratheodory(const WeightedPointSet& p, Index clusters);

/// Cluster count used when the caller does not pick one.
Index default_cluster_count(Index cols, Index n);

/// Unit-weight clustered reduction over kernel rows: the selection
/// preserves every column sum of the kernel matrix.
CoresetSelection accurate_coreset(const kernel::KernelMatrix& k);

}  // namespace coreset::caratheodory
