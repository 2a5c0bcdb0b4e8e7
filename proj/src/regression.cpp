#include "coreset/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <random>

namespace coreset::regression {

namespace {

double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_query(const RegressionProblem& prob, const Vector& w) {
  if (w.size() != prob.d()) {
    throw std::invalid_argument("query dimension does not match the problem");
  }
}

double wall_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Matrix RegressionCoreset::scaled_design() const {
  Matrix scaled = x_rows;
  for (Index i = 0; i < scaled.rows(); ++i) {
    scaled.row(i) *= std::pow(data_weights(i), 1.0 / p);
  }
  return scaled;
}

Vector RegressionCoreset::scaled_response() const {
  Vector scaled = y_vals;
  for (Index i = 0; i < scaled.size(); ++i) {
    scaled(i) *= std::pow(data_weights(i), 1.0 / p);
  }
  return scaled;
}

double reg_loss(const RegressionProblem& prob, const Vector& w) {
  check_query(prob, w);
  const Vector residual = prob.x * w - prob.y;
  double loss = 0.0;
  for (Index i = 0; i < residual.size(); ++i) loss += ipow(residual(i), prob.p);
  double reg = 0.0;
  for (Index j = 0; j < w.size(); ++j) reg += ipow(w(j), prob.p);
  return loss + prob.lambda * reg;
}

RegressionCoreset build_coreset(const RegressionProblem& prob, kernel::RegularizerForm form,
                                std::optional<Index> clusters) {
  const kernel::KernelMatrix km =
      kernel::build_regression_kernel(prob.x, prob.y, prob.lambda, prob.p, form);
  const Index cluster_count =
      clusters.value_or(caratheodory::default_cluster_count(km.rows.cols(), km.rows.rows()));
  const caratheodory::CoresetSelection sel = caratheodory::fast_caratheodory(
      caratheodory::WeightedPointSet::uniform(km.rows), cluster_count);

  RegressionCoreset c;
  c.lambda = prob.lambda;
  c.p = prob.p;
  c.d = prob.d();

  std::vector<Index> data_rows;
  std::vector<double> data_weights;
  for (Index s = 0; s < sel.size(); ++s) {
    const auto& prov = km.provenance[static_cast<std::size_t>(sel.indices[s])];
    if (prov.kind == kernel::RowProvenance::Kind::data) {
      data_rows.push_back(prov.index);
      data_weights.push_back(sel.weights(s));
    } else {
      c.reg_diag[prov.index] += sel.weights(s) * prov.sign;
    }
  }

  c.data_indices = std::move(data_rows);
  c.data_weights = Eigen::Map<Vector>(data_weights.data(), static_cast<Index>(data_weights.size()));
  c.x_rows.resize(c.data_count(), prob.d());
  c.y_vals.resize(c.data_count());
  for (Index i = 0; i < c.data_count(); ++i) {
    c.x_rows.row(i) = prob.x.row(c.data_indices[static_cast<std::size_t>(i)]);
    c.y_vals(i) = prob.y(c.data_indices[static_cast<std::size_t>(i)]);
  }
  return c;
}

double coreset_reg_loss(const RegressionCoreset& c, const Vector& w) {
  if (w.size() != c.d) {
    throw std::invalid_argument("query dimension does not match the coreset");
  }
  double loss = 0.0;
  for (Index i = 0; i < c.data_count(); ++i) {
    loss += c.data_weights(i) * ipow(c.x_rows.row(i).dot(w) - c.y_vals(i), c.p);
  }
  if (!c.reg_diag.empty()) {
    Vector q(c.d + 1);
    q.head(c.d) = w;
    q(c.d) = -1.0;
    const Vector lifted = kernel::outer_power_vec(q, c.p);
    double reg = 0.0;
    for (const auto& [pos, value] : c.reg_diag) reg += value * lifted(pos);
    loss += c.lambda * reg;
  }
  return loss;
}

Vector solve_ridge(const RegressionCoreset& c) {
  if (c.p != 2) {
    throw std::invalid_argument("solve_ridge: closed form requires p = 2");
  }
  const Matrix xc = c.scaled_design();
  const Vector yc = c.scaled_response();

  // Split the reduced regularizer by position: feature-block picks are
  // quadratic in w, picks at (i, d+1) or (d+1, i) multiply q_i * q_{d+1}
  // = -w_i and are linear. The label-diagonal sign is zero, so that
  // position never appears.
  Matrix feature = Matrix::Zero(c.d, c.d);
  Vector linear = Vector::Zero(c.d);
  const Index d_aug = c.d + 1;
  for (const auto& [pos, value] : c.reg_diag) {
    const Index row = pos / d_aug;
    const Index col = pos % d_aug;
    if (row < c.d && col < c.d) {
      feature(row, col) += value;
    } else if (row < c.d && col == c.d) {
      linear(row) += value;
    } else if (row == c.d && col < c.d) {
      linear(col) += value;
    } else {
      throw numerical_error("solve_ridge: unexpected pick at the label-diagonal position");
    }
  }

  // loss(w) = ||Xc w - yc||_2^2 + lambda (w^T F w - linear^T w); only the
  // symmetric part of F reaches the normal equations.
  Matrix normal = xc.transpose() * xc + c.lambda * 0.5 * (feature + feature.transpose());
  Vector rhs = xc.transpose() * yc + 0.5 * c.lambda * linear;
  Eigen::LDLT<Matrix> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    Eigen::FullPivLU<Matrix> lu(normal);
    if (!lu.isInvertible()) {
      throw numerical_error("solve_ridge: singular normal matrix");
    }
    return lu.solve(rhs);
  }
  return ldlt.solve(rhs);
}

Vector solve_ridge_full(const RegressionProblem& prob) {
  if (prob.p != 2) {
    throw std::invalid_argument("solve_ridge_full: closed form requires p = 2");
  }
  Matrix normal = prob.x.transpose() * prob.x;
  normal.diagonal().array() += prob.lambda;
  Eigen::LDLT<Matrix> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    Eigen::FullPivLU<Matrix> lu(normal);
    if (!lu.isInvertible()) {
      throw numerical_error("solve_ridge_full: singular normal matrix");
    }
    return lu.solve(prob.x.transpose() * prob.y);
  }
  return ldlt.solve(prob.x.transpose() * prob.y);
}

EquivalenceReport verify_equivalence(const RegressionProblem& prob, const RegressionCoreset& c,
                                     int num_queries, std::uint64_t seed) {
  if (num_queries < 1) {
    throw std::invalid_argument("verify_equivalence: need at least one query");
  }
  const auto start = std::chrono::steady_clock::now();

  EquivalenceReport report;
  report.num_queries = num_queries;
  report.full_rows = prob.n();
  report.coreset_rows = c.data_count();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(prob.d());
  for (int q = 0; q < num_queries; ++q) {
    for (Index j = 0; j < w.size(); ++j) w(j) = normal(rng);
    const double full = reg_loss(prob, w);
    const double reduced = coreset_reg_loss(c, w);
    const double gap = std::abs(full - reduced);
    report.max_abs_gap = std::max(report.max_abs_gap, gap);
    report.max_rel_gap = std::max(report.max_rel_gap, gap / (1.0 + std::abs(full)));
  }

  if (prob.p == 2) {
    try {
      report.full_solution = solve_ridge_full(prob);
      report.coreset_solution = solve_ridge(c);
      const double denom = 1.0 + report.full_solution.norm();
      report.solution_gap = (report.full_solution - report.coreset_solution).norm() / denom;
    } catch (const numerical_error&) {
      // Rank-deficient unregularized problems have no unique argmin; the
      // report then carries the loss gaps only.
      report.full_solution = Vector();
      report.coreset_solution = Vector();
      report.solution_gap = 0.0;
    }
  }
  report.verify_wall_ms = wall_ms_since(start);
  return report;
}

std::vector<SweepRow> sweep_lambda(const RegressionProblem& prob, const std::vector<double>& lambdas) {
  if (lambdas.empty()) {
    throw std::invalid_argument("sweep_lambda: need at least one lambda");
  }
  for (double lambda : lambdas) {
    if (lambda < 0.0) throw std::invalid_argument("sweep_lambda: lambda must be >= 0");
  }

  // The data-row spectrum does not depend on lambda; compute it once.
  const kernel::KernelMatrix data_kernel =
      kernel::build_regression_kernel(prob.x, prob.y, 0.0, prob.p);
  const numerics::SpectralSummary spectrum = numerics::thin_svd(data_kernel.rows);

  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    RegressionProblem sub = prob;
    sub.lambda = lambda;
    const RegressionCoreset c = build_coreset(sub);
    rows.push_back({lambda, c.data_count(), numerics::statistical_dimension(spectrum, lambda) + 1.0});
  }
  return rows;
}

}  // namespace coreset::regression
