#include "coreset/caratheodory.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace coreset::caratheodory {

namespace {

constexpr double kWeightDropScale = 1e-12;  // relative to the initial max weight
constexpr double kResidualScale = 1e-10;    // null-vector residual, relative to ||P||_F
constexpr double kPivotFloor = 1e-11;       // below this an entry is not a usable pivot

struct ReduceState {
  std::vector<Index> rows;  // surviving positions into the input point set
  Vector weights;           // aligned with rows
};

/// One pass: build the affine-difference matrix of the survivors, take a
/// null-space basis from a pivoted QR, and spend its vectors on weight
/// reductions. Returns the number of points dropped.
Index reduce_pass(const Matrix& points, ReduceState& state, double drop_threshold,
                  Index& steps_left) {
  const Index n = static_cast<Index>(state.rows.size());
  const Index m = points.cols();
  if (n <= 1) return 0;

  // A has columns p_i - p_1; its null space is the orthogonal complement
  // of the column space of A^T, read off the QR of A^T.
  Matrix at(n - 1, m);
  for (Index i = 1; i < n; ++i) {
    at.row(i - 1) = points.row(state.rows[i]) - points.row(state.rows[0]);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(at);
  const Index rank = qr.rank();
  const Index nullity = (n - 1) - rank;
  if (nullity <= 0) return 0;

  Matrix slab = Matrix::Zero(n - 1, nullity);
  slab.bottomRows(nullity).setIdentity();
  Matrix basis(n, nullity);
  basis.bottomRows(n - 1) = qr.householderQ() * slab;
  basis.row(0) = -basis.bottomRows(n - 1).colwise().sum();

  const double points_norm = [&] {
    double sq = 0.0;
    for (Index i : state.rows) sq += points.row(i).squaredNorm();
    return std::sqrt(sq);
  }();

  std::vector<bool> column_active(static_cast<std::size_t>(nullity), true);
  std::vector<bool> row_alive(static_cast<std::size_t>(n), true);
  Index dropped_total = 0;

  for (Index c = 0; c < nullity; ++c) {
    if (!column_active[static_cast<std::size_t>(c)]) continue;
    Vector v = basis.col(c);
    for (Index i = 0; i < n; ++i) {
      if (!row_alive[static_cast<std::size_t>(i)]) v(i) = 0.0;
    }
    const double vnorm = v.norm();
    if (vnorm < kPivotFloor) {
      column_active[static_cast<std::size_t>(c)] = false;
      continue;
    }
    v /= vnorm;

    // Validate that v is still an affine dependence of the survivors.
    Vector residual = Vector::Zero(m);
    for (Index i = 0; i < n; ++i) {
      if (v(i) != 0.0) residual += v(i) * points.row(state.rows[i]).transpose();
    }
    if (residual.norm() > kResidualScale * (1.0 + points_norm) ||
        std::abs(v.sum()) > kResidualScale * std::sqrt(static_cast<double>(n))) {
      column_active[static_cast<std::size_t>(c)] = false;
      continue;
    }

    // Orient v so its largest-magnitude entry is positive.
    if (-v.minCoeff() > v.maxCoeff()) v = -v;

    // alpha = min u_i / v_i over positive v_i, smallest index on ties.
    Index arg = -1;
    double alpha = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!row_alive[static_cast<std::size_t>(i)] || v(i) <= 0.0) continue;
      const double ratio = state.weights(i) / v(i);
      if (arg < 0 || ratio < alpha) {
        arg = i;
        alpha = ratio;
      }
    }
    if (arg < 0) {
      column_active[static_cast<std::size_t>(c)] = false;
      continue;
    }
    if (steps_left-- <= 0) {
      throw numerical_error(
          "caratheodory_reduce: exceeded the iteration budget; " +
          std::to_string(n - dropped_total) + " points remain with " +
          std::to_string(nullity - c) + " dependences unspent");
    }

    std::vector<Index> dropped;
    for (Index i = 0; i < n; ++i) {
      if (!row_alive[static_cast<std::size_t>(i)]) continue;
      state.weights(i) -= alpha * v(i);
      if (i == arg || state.weights(i) <= drop_threshold) {
        state.weights(i) = 0.0;
        row_alive[static_cast<std::size_t>(i)] = false;
        dropped.push_back(i);
      }
    }
    column_active[static_cast<std::size_t>(c)] = false;
    dropped_total += static_cast<Index>(dropped.size());

    // Eliminate the dropped coordinates from the unused basis vectors so
    // they stay dependences of the surviving points.
    for (Index j : dropped) {
      Index pivot = -1;
      double best = kPivotFloor;
      for (Index c2 = c + 1; c2 < nullity; ++c2) {
        if (!column_active[static_cast<std::size_t>(c2)]) continue;
        const double mag = std::abs(basis(j, c2));
        if (mag > best) {
          best = mag;
          pivot = c2;
        }
      }
      for (Index c2 = c + 1; c2 < nullity; ++c2) {
        if (!column_active[static_cast<std::size_t>(c2)] || c2 == pivot) continue;
        if (pivot >= 0 && basis(j, c2) != 0.0) {
          basis.col(c2) -= (basis(j, c2) / basis(j, pivot)) * basis.col(pivot);
        }
        basis(j, c2) = 0.0;
      }
      if (pivot >= 0) column_active[static_cast<std::size_t>(pivot)] = false;
    }
  }

  if (dropped_total > 0) {
    ReduceState next;
    next.rows.reserve(static_cast<std::size_t>(n - dropped_total));
    std::vector<double> kept_weights;
    kept_weights.reserve(static_cast<std::size_t>(n - dropped_total));
    for (Index i = 0; i < n; ++i) {
      if (!row_alive[static_cast<std::size_t>(i)]) continue;
      next.rows.push_back(state.rows[i]);
      kept_weights.push_back(state.weights(i));
    }
    next.weights = Eigen::Map<Vector>(kept_weights.data(), static_cast<Index>(kept_weights.size()));
    state = std::move(next);
  }
  return dropped_total;
}

CoresetSelection reduce_positions(const Matrix& points, const Vector& weights) {
  ReduceState state;
  state.rows.resize(static_cast<std::size_t>(points.rows()));
  std::iota(state.rows.begin(), state.rows.end(), Index{0});
  state.weights = weights;

  const double drop_threshold = kWeightDropScale * weights.maxCoeff();
  Index steps_left = points.rows();
  while (true) {
    const Index dropped = reduce_pass(points, state, drop_threshold, steps_left);
    if (dropped == 0) break;
  }

  CoresetSelection sel;
  sel.indices = state.rows;
  sel.weights = state.weights;
  return sel;
}

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

}  // namespace

WeightedPointSet WeightedPointSet::create(Matrix points, Vector weights) {
  if (points.rows() != weights.size()) {
    throw std::invalid_argument("WeightedPointSet: point and weight counts differ");
  }
  if (points.cols() < 1) {
    throw std::invalid_argument("WeightedPointSet: points need at least one coordinate");
  }
  if (!points.allFinite() || !weights.allFinite()) {
    throw input_error("WeightedPointSet: non-finite entries");
  }
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) < 0.0) {
      throw std::invalid_argument("WeightedPointSet: negative weight at row " + std::to_string(i));
    }
  }
  const Index kept = (weights.array() > 0.0).count();
  if (kept == 0) {
    throw std::invalid_argument("WeightedPointSet: no rows with positive weight");
  }

  WeightedPointSet set;
  if (kept == weights.size()) {
    set.points = std::move(points);
    set.weights = std::move(weights);
    set.source_indices.resize(static_cast<std::size_t>(set.weights.size()));
    std::iota(set.source_indices.begin(), set.source_indices.end(), Index{0});
    return set;
  }
  set.points.resize(kept, points.cols());
  set.weights.resize(kept);
  set.source_indices.reserve(static_cast<std::size_t>(kept));
  Index r = 0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    set.points.row(r) = points.row(i);
    set.weights(r) = weights(i);
    set.source_indices.push_back(i);
    ++r;
  }
  return set;
}

WeightedPointSet WeightedPointSet::uniform(Matrix points) {
  const Index n = points.rows();
  return create(std::move(points), Vector::Ones(n));
}

CoresetSelection caratheodory_reduce(const WeightedPointSet& p) {
  CoresetSelection sel = reduce_positions(p.points, p.weights);
  for (auto& idx : sel.indices) idx = p.source_indices[static_cast<std::size_t>(idx)];
  return sel;
}

CoresetSelection fast_caratheodory(const WeightedPointSet& p, Index clusters) {
  if (clusters < 2) {
    throw std::invalid_argument("fast_caratheodory: clusters must be >= 2");
  }
  const Index m = p.dim();
  const Index target = m + 1;

  std::vector<Index> current(static_cast<std::size_t>(p.size()));
  std::iota(current.begin(), current.end(), Index{0});
  Vector weights = p.weights;

  while (static_cast<Index>(current.size()) > target) {
    const Index n = static_cast<Index>(current.size());
    const Index group = ceil_div(n, std::min(clusters, n));
    const Index actual = ceil_div(n, group);
    if (actual >= n) break;  // size-one clusters; direct reduction below

    Matrix means(actual, m);
    Vector mean_weights(actual);
    for (Index c = 0; c < actual; ++c) {
      const Index begin = c * group;
      const Index end = std::min(begin + group, n);
      double total = 0.0;
      Vector acc = Vector::Zero(m);
      for (Index i = begin; i < end; ++i) {
        total += weights(i);
        acc += weights(i) * p.points.row(current[static_cast<std::size_t>(i)]).transpose();
      }
      mean_weights(c) = total;
      means.row(c) = acc.transpose() / total;
    }

    const CoresetSelection kept = reduce_positions(means, mean_weights);
    if (kept.size() >= actual) break;  // no progress possible at this cluster count

    std::vector<Index> next;
    std::vector<double> next_weights;
    for (Index s = 0; s < kept.size(); ++s) {
      const Index c = kept.indices[static_cast<std::size_t>(s)];
      const Index begin = c * group;
      const Index end = std::min(begin + group, n);
      const double scale = kept.weights(s) / mean_weights(c);
      for (Index i = begin; i < end; ++i) {
        next.push_back(current[static_cast<std::size_t>(i)]);
        next_weights.push_back(scale * weights(i));
      }
    }
    current = std::move(next);
    weights = Eigen::Map<Vector>(next_weights.data(), static_cast<Index>(next_weights.size()));
  }

  // Polish to rank+1; returns the survivors unchanged when they are
  // already affinely independent.
  Matrix surviving(static_cast<Index>(current.size()), m);
  for (Index i = 0; i < static_cast<Index>(current.size()); ++i) {
    surviving.row(i) = p.points.row(current[static_cast<std::size_t>(i)]);
  }
  CoresetSelection polished = reduce_positions(surviving, weights);

  CoresetSelection sel;
  sel.indices.reserve(polished.indices.size());
  for (Index idx : polished.indices) {
    sel.indices.push_back(p.source_indices[static_cast<std::size_t>(current[static_cast<std::size_t>(idx)])]);
  }
  sel.weights = polished.weights;
  return sel;
}

Index default_cluster_count(Index cols, Index n) {
  return std::max<Index>(2, std::min(2 * (cols + 2), n));
}

CoresetSelection accurate_coreset(const kernel::KernelMatrix& k) {
  if (k.rows.rows() == 0) {
    throw std::invalid_argument("accurate_coreset: empty kernel matrix");
  }
  WeightedPointSet set = WeightedPointSet::uniform(k.rows);
  return fast_caratheodory(set, default_cluster_count(k.rows.cols(), k.rows.rows()));
}

}  // namespace coreset::caratheodory
