#include "coreset/numerics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace coreset::numerics {

namespace {

double default_rank_tolerance(Index rows, Index cols, double sigma_max) {
  const double eps = std::numeric_limits<double>::epsilon();
  return static_cast<double>(std::max(rows, cols)) * eps * sigma_max;
}

}  // namespace

SpectralSummary thin_svd(const Matrix& a, std::optional<Index> top_k) {
  if (!a.allFinite()) {
    throw input_error("thin_svd: matrix contains NaN or Inf entries");
  }
  const Index thin = std::min(a.rows(), a.cols());
  if (top_k && (*top_k < 1 || *top_k > thin)) {
    throw std::invalid_argument("thin_svd: top_k out of range");
  }

  SpectralSummary s;
  if (thin == 0) {
    s.singular_values = Vector(0);
    s.left_basis = Matrix(a.rows(), 0);
    s.right_basis = Matrix(a.cols(), 0);
    s.rank_tolerance = 0.0;
    return s;
  }

  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index k = top_k.value_or(thin);
  s.singular_values = svd.singularValues().head(k);
  s.left_basis = svd.matrixU().leftCols(k);
  s.right_basis = svd.matrixV().leftCols(k);
  s.rank_tolerance = default_rank_tolerance(a.rows(), a.cols(), svd.singularValues()(0));
  return s;
}

Index effective_rank(const SpectralSummary& s) {
  Index r = 0;
  for (Index i = 0; i < s.singular_values.size(); ++i) {
    if (s.singular_values(i) > s.rank_tolerance) ++r;
  }
  return r;
}

Vector null_space_vector(const Matrix& a) {
  if (!a.allFinite()) {
    throw input_error("null_space_vector: matrix contains NaN or Inf entries");
  }
  if (a.cols() == 0) {
    throw numerical_error("null_space_vector: matrix has no columns");
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Index cols = a.cols();
  const Index nsv = svd.singularValues().size();
  const double sigma_max = nsv > 0 ? svd.singularValues()(0) : 0.0;
  const double tol = default_rank_tolerance(a.rows(), a.cols(), sigma_max);
  Index rank = 0;
  for (Index i = 0; i < nsv; ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  if (rank >= cols) {
    throw numerical_error("null_space_vector: matrix has full column rank");
  }
  // Any right singular vector beyond the rank spans the null space; the
  // last one pairs with the smallest singular value.
  Vector v = svd.matrixV().col(cols - 1);
  v.normalize();
  return v;
}

double statistical_dimension(const SpectralSummary& s, double lambda) {
  if (lambda < 0.0) {
    throw std::invalid_argument("statistical_dimension: lambda must be >= 0");
  }
  double sd = 0.0;
  for (Index i = 0; i < s.singular_values.size(); ++i) {
    const double sigma = s.singular_values(i);
    if (sigma <= s.rank_tolerance) continue;
    sd += 1.0 / (1.0 + (lambda * lambda) / (sigma * sigma));
  }
  return sd;
}

}  // namespace coreset::numerics
