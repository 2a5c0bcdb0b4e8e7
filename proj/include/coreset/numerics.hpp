#pragma once

#include <Eigen/Dense>
#include <optional>

#include "coreset/errors.hpp"

namespace coreset::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thin SVD triple A = U * diag(sigma) * V^T together with the tolerance
/// used for numerical rank decisions on this matrix.
struct SpectralSummary {
  Vector singular_values;  // nonincreasing, >= 0
  Matrix left_basis;       // U, orthonormal columns
  Matrix right_basis;      // V, orthonormal columns
  double rank_tolerance = 0.0;
};

/// Thin SVD of a dense matrix. With `top_k` set, only the leading k
/// singular triplets are returned. Rejects non-finite input.
SpectralSummary thin_svd(const Matrix& a, std::optional<Index> top_k = std::nullopt);

/// Number of singular values above the summary's rank tolerance.
Index effective_rank(const SpectralSummary& s);

/// A unit vector v with ||A v||_2 <= 1e-10 * ||A||_F. Throws
/// numerical_error when A has full column rank.
Vector null_space_vector(const Matrix& a);

/// sum_i 1 / (1 + lambda^2 / sigma_i^2) over singular values above the
/// rank tolerance. Equals the effective rank at lambda = 0 and decays to
/// zero as lambda grows.
double statistical_dimension(const SpectralSummary& s, double lambda);

}  // namespace coreset::numerics
