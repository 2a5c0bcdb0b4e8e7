#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coreset/caratheodory.hpp"
#include "coreset/numerics.hpp"

namespace coreset::lvm {

using numerics::Index;
using numerics::Matrix;
using numerics::Vector;

/// Samples for a latent variable problem: n rows in R^d and the number
/// of latent components k < d. For single-topic data the rows are
/// per-document word-frequency vectors.
struct MomentModel {
  Matrix x;
  Index k = 0;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
};

/// M with M^T T2 M = I_k, stored with the top-k spectrum of T2 so the
/// un-whitening pseudo-inverse can be formed without refactoring.
struct WhiteningMatrix {
  Matrix m;                // d x k
  Vector source_spectrum;  // top-k spectrum of T2, nonincreasing
};

/// Per-sample flattened whitened third moments: row i is
/// vec((M^T x_i) (x)^3) / n, so the column sums equal vec(T3_whitened).
struct WhitenedTensorKernel {
  Matrix rows;  // n x k^3
  WhiteningMatrix whitening;
  Index k = 0;
};

struct TensorEigenpair {
  double eigenvalue = 0.0;
  Vector eigenvector;  // unit norm in R^k
  bool converged = false;
  int iterations = 0;
};

struct TensorDecomposition {
  std::vector<TensorEigenpair> pairs;
  bool all_converged = true;
};

/// Mixing weights and component vectors recovered from eigenpairs.
struct LatentParameters {
  Vector weights;     // k entries, gamma_j = 1 / lambda_j^2
  Matrix components;  // d x k, column j = mu_j
};

/// (1/n) sum_i x_i x_i^T.
Matrix second_moment(const Matrix& x);

/// Top-k whitening of a symmetric PSD matrix: M = V_k S_k^{-1/2}.
WhiteningMatrix whitening_matrix(const Matrix& t2, Index k);

WhitenedTensorKernel build_lvm_kernel(const MomentModel& model);

/// Unit-weight selection over the whitened kernel rows; at most
/// C(k+2,3)+1 samples survive and the whitened third moment is kept.
caratheodory::CoresetSelection lvm_coreset(const WhitenedTensorKernel& kernel,
                                           std::optional<Index> clusters = std::nullopt);
caratheodory::CoresetSelection lvm_coreset(const MomentModel& model);

/// vec of the whitened empirical third moment: the kernel's column sums,
/// optionally reweighted by a selection.
Vector whitened_tensor(const WhitenedTensorKernel& kernel);
Vector whitened_tensor(const WhitenedTensorKernel& kernel, const caratheodory::CoresetSelection& sel);

/// sum_i w_i (p_i^T x)^p.
double tensor_contract(const Matrix& points, const Vector& weights, const Vector& x, int p);

/// Coreset for p-order tensor contraction over raw points: at most
/// C(d+p-1, p)+1 rows whose weighted contractions match the full set for
/// every query.
caratheodory::CoresetSelection contraction_coreset(const Matrix& points, int p,
                                                   std::optional<Index> clusters = std::nullopt);

/// Power iteration with deflation on a flattened symmetric k x k x k
/// tensor; best-of-restarts per component, deterministic per seed.
TensorDecomposition decompose_symmetric3(const Vector& flat_tensor, Index k, int restarts, int iters,
                                         std::uint64_t seed);
TensorDecomposition tensor_power_decompose(const WhitenedTensorKernel& kernel, int restarts, int iters,
                                           std::uint64_t seed);

/// Un-whitening: gamma_j = 1 / lambda_j^2, mu_j = lambda_j (M^T)^+ v_j.
LatentParameters recover_parameters(const TensorDecomposition& decomposition,
                                    const WhiteningMatrix& whitening);

}  // namespace coreset::lvm
