#pragma once

#include <vector>

#include "coreset/numerics.hpp"

namespace coreset::kernel {

using numerics::Index;
using numerics::Matrix;
using numerics::Vector;

/// Hard cap on the per-row size d_aug^p of any lifted representation;
/// larger lifts are rejected with an input error.
inline constexpr Index kMaxKernelRowSize = 10'000'000;

/// Where a kernel row came from: a data sample or one nonzero diagonal
/// entry of the scaled regularizer.
struct RowProvenance {
  enum class Kind { data, regularizer };
  Kind kind = Kind::data;
  Index index = 0;    // sample index, or flat diagonal position
  double sign = 0.0;  // regularizer rows only: the -1/+1 diagonal entry
};

/// Diagonal of the sign tensor T = diag(vec(M)) used to express
/// lambda * ||w||_p^p as a linear functional of vec(q (x)^p q).
struct SignTensorDiagonal {
  Index d_aug = 0;
  int p = 0;
  Vector diag;  // length d_aug^p, entries in {-1, 0, +1}
};

/// Lifted row matrix: data rows vec(d_i (x)^p d_i) followed by the
/// nonzero rows of lambda * T, with provenance back to the source.
struct KernelMatrix {
  Matrix rows;
  std::vector<RowProvenance> provenance;
  Index d_aug = 0;
  int p = 0;
  double lambda = 0.0;
  Index data_row_count = 0;
};

/// How the regularizer is lifted: the full sign-diagonal block, or the
/// d basis-outer rows (p = 2 only).
enum class RegularizerForm { sign_diagonal, basis_outer };

/// Row-major flat position of a multi-index over [0, d_aug)^p.
Index flat_index(const std::vector<Index>& multi, Index d_aug);

/// Inverse of flat_index.
std::vector<Index> multi_index(Index flat, Index d_aug, int p);

/// vec(x (x)^p x): entry at the flat position of (i_1, ..., i_p) equals
/// x_{i_1} * ... * x_{i_p}.
Vector outer_power_vec(const Vector& x, int p);

/// Sign matrix for the ridge regularizer with a label slot: M_{i,j} = -1
/// above the diagonal, M_{d+1,d+1} = 0, +1 elsewhere. d_aug = d + 1.
SignTensorDiagonal ridge_sign_matrix(Index d);

/// Label-free variant: d_aug = d and every diagonal entry is +1.
SignTensorDiagonal ridge_sign_matrix_unlabeled(Index d);

/// General even-p sign tensor with a label slot. Permutation classes with
/// an odd member count get one zero entry so the remaining signs still
/// cancel exactly.
SignTensorDiagonal lp_sign_tensor(Index d, int p);

/// Lift a regression problem: one row per sample from (x_i; y_i), then
/// one row per nonzero entry of lambda * T when lambda > 0.
KernelMatrix build_regression_kernel(const Matrix& x, const Vector& y, double lambda, int p,
                                     RegularizerForm form = RegularizerForm::sign_diagonal);

/// Number of distinct monomials of degree p in `symbols` variables,
/// i.e. the rank ceiling of an order-p lift.
Index multiset_count(Index symbols, int p);

}  // namespace coreset::kernel
