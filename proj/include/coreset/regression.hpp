#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "coreset/caratheodory.hpp"
#include "coreset/kernelization.hpp"

namespace coreset::regression {

using numerics::Index;
using numerics::Matrix;
using numerics::Vector;

/// An l_p-regularized l_p regression instance for even p:
/// loss(w) = ||X w - y||_p^p + lambda ||w||_p^p.
struct RegressionProblem {
  Matrix x;
  Vector y;
  double lambda = 0.0;
  int p = 2;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
};

/// Selected samples plus the reduced regularizer. Data rows keep their
/// raw values; `data_weights` carries the Caratheodory weights, and the
/// scaled accessors fold them in as w^(1/p) row scaling for solvers.
struct RegressionCoreset {
  std::vector<Index> data_indices;  // ascending sample indices
  Vector data_weights;
  Matrix x_rows;  // raw selected sample rows
  Vector y_vals;
  std::map<Index, double> reg_diag;  // flat diagonal position -> weight * sign
  double lambda = 0.0;
  int p = 2;
  Index d = 0;

  Index data_count() const { return static_cast<Index>(data_indices.size()); }
  Matrix scaled_design() const;
  Vector scaled_response() const;
};

/// Loss equality check over seeded random queries, with the solver
/// comparison filled in for p = 2.
struct EquivalenceReport {
  int num_queries = 0;
  double max_abs_gap = 0.0;
  double max_rel_gap = 0.0;
  Vector full_solution;
  Vector coreset_solution;
  double solution_gap = 0.0;
  Index full_rows = 0;
  Index coreset_rows = 0;
  double build_wall_ms = 0.0;
  double verify_wall_ms = 0.0;
};

/// One sweep entry: data rows actually selected at this lambda next to
/// the statistical-dimension bound computed from the data spectrum.
struct SweepRow {
  double lambda = 0.0;
  Index data_rows_selected = 0;
  double sd_bound = 0.0;
};

/// ||X w - y||_p^p + lambda ||w||_p^p.
double reg_loss(const RegressionProblem& prob, const Vector& w);

/// Kernelize, select, and reconstruct the coreset.
RegressionCoreset build_coreset(const RegressionProblem& prob,
                                kernel::RegularizerForm form = kernel::RegularizerForm::sign_diagonal,
                                std::optional<Index> clusters = std::nullopt);

/// Coreset-side loss: sum_i w_i (x_i^T w - y_i)^p plus the reduced
/// regularizer evaluated against vec(q (x)^p q) with q = (w; -1).
double coreset_reg_loss(const RegressionCoreset& c, const Vector& w);

/// Closed-form ridge solution from the coreset (p = 2 only).
Vector solve_ridge(const RegressionCoreset& c);

/// Full-data ridge solution, the oracle solve_ridge is compared against.
Vector solve_ridge_full(const RegressionProblem& prob);

/// Evaluate full and coreset losses on seeded standard-normal queries.
EquivalenceReport verify_equivalence(const RegressionProblem& prob, const RegressionCoreset& c,
                                     int num_queries, std::uint64_t seed);

/// Build one coreset per lambda and report selected data-row counts next
/// to the statistical-dimension trend.
std::vector<SweepRow> sweep_lambda(const RegressionProblem& prob, const std::vector<double>& lambdas);

}  // namespace coreset::regression
