#include "coreset/lvm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "coreset/kernelization.hpp"

namespace coreset::lvm {

namespace {

constexpr double kConvergenceTol = 1e-10;

void check_model(const MomentModel& model) {
  if (model.k < 1 || model.k >= model.d()) {
    throw std::invalid_argument("MomentModel: need 1 <= k < d");
  }
  if (model.n() < model.k) {
    throw std::invalid_argument("MomentModel: need at least k samples");
  }
  if (!model.x.allFinite()) {
    throw input_error("MomentModel: non-finite entries");
  }
}

/// T(x, x, I) for a flattened symmetric order-3 tensor.
Vector contract_two(const Vector& flat, const Vector& x) {
  const Index k = x.size();
  Vector out = Vector::Zero(k);
  Index pos = 0;
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      const double xab = x(a) * x(b);
      for (Index c = 0; c < k; ++c) {
        out(c) += flat(pos++) * xab;
      }
    }
  }
  return out;
}

}  // namespace

Matrix second_moment(const Matrix& x) {
  if (x.rows() < 1) {
    throw std::invalid_argument("second_moment: need at least one sample");
  }
  Matrix t2 = (x.transpose() * x) / static_cast<double>(x.rows());
  t2 = 0.5 * (t2 + t2.transpose());
  return t2;
}

WhiteningMatrix whitening_matrix(const Matrix& t2, Index k) {
  if (t2.rows() != t2.cols()) {
    throw std::invalid_argument("whitening_matrix: matrix must be square");
  }
  if (k < 1 || k > t2.rows()) {
    throw std::invalid_argument("whitening_matrix: k out of range");
  }
  if ((t2 - t2.transpose()).norm() > 1e-8 * (1.0 + t2.norm())) {
    throw std::invalid_argument("whitening_matrix: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(t2);
  if (eig.info() != Eigen::Success) {
    throw numerical_error("whitening_matrix: eigendecomposition failed");
  }
  const Index d = t2.rows();
  const double top = eig.eigenvalues()(d - 1);
  const double tol = static_cast<double>(d) * std::numeric_limits<double>::epsilon() * std::abs(top);

  WhiteningMatrix w;
  w.m.resize(d, k);
  w.source_spectrum.resize(k);
  for (Index j = 0; j < k; ++j) {
    const double value = eig.eigenvalues()(d - 1 - j);  // descending
    if (value <= tol) {
      throw numerical_error("whitening_matrix: rank below k (component " + std::to_string(j) + ")");
    }
    w.source_spectrum(j) = value;
    w.m.col(j) = eig.eigenvectors().col(d - 1 - j) / std::sqrt(value);
  }
  return w;
}

WhitenedTensorKernel build_lvm_kernel(const MomentModel& model) {
  check_model(model);
  const WhiteningMatrix whitening = whitening_matrix(second_moment(model.x), model.k);

  const Index n = model.n();
  const Index k = model.k;
  const Matrix projected = model.x * whitening.m;  // n x k

  WhitenedTensorKernel kernel;
  kernel.k = k;
  kernel.whitening = whitening;
  kernel.rows.resize(n, k * k * k);
  const double scale = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    kernel.rows.row(i) =
        scale * kernel::outer_power_vec(projected.row(i).transpose(), 3).transpose();
  }
  return kernel;
}

caratheodory::CoresetSelection lvm_coreset(const WhitenedTensorKernel& kernel,
                                           std::optional<Index> clusters) {
  if (clusters) {
    return caratheodory::fast_caratheodory(caratheodory::WeightedPointSet::uniform(kernel.rows),
                                           *clusters);
  }
  kernel::KernelMatrix km;
  km.rows = kernel.rows;
  km.d_aug = kernel.k;
  km.p = 3;
  km.lambda = 0.0;
  km.data_row_count = kernel.rows.rows();
  km.provenance.reserve(static_cast<std::size_t>(km.data_row_count));
  for (Index i = 0; i < km.data_row_count; ++i) {
    km.provenance.push_back({kernel::RowProvenance::Kind::data, i, 0.0});
  }
  return caratheodory::accurate_coreset(km);
}

caratheodory::CoresetSelection lvm_coreset(const MomentModel& model) {
  return lvm_coreset(build_lvm_kernel(model));
}

Vector whitened_tensor(const WhitenedTensorKernel& kernel) {
  return kernel.rows.colwise().sum().transpose();
}

Vector whitened_tensor(const WhitenedTensorKernel& kernel, const caratheodory::CoresetSelection& sel) {
  Vector t = Vector::Zero(kernel.rows.cols());
  for (Index s = 0; s < sel.size(); ++s) {
    t += sel.weights(s) * kernel.rows.row(sel.indices[static_cast<std::size_t>(s)]).transpose();
  }
  return t;
}

double tensor_contract(const Matrix& points, const Vector& weights, const Vector& x, int p) {
  if (points.rows() != weights.size()) {
    throw std::invalid_argument("tensor_contract: point and weight counts differ");
  }
  if (points.cols() != x.size()) {
    throw std::invalid_argument("tensor_contract: query dimension mismatch");
  }
  const Vector dots = points * x;
  double total = 0.0;
  for (Index i = 0; i < dots.size(); ++i) {
    double term = 1.0;
    for (int j = 0; j < p; ++j) term *= dots(i);
    total += weights(i) * term;
  }
  return total;
}

caratheodory::CoresetSelection contraction_coreset(const Matrix& points, int p,
                                                   std::optional<Index> clusters) {
  if (p < 1) {
    throw std::invalid_argument("contraction_coreset: p must be >= 1");
  }
  if (points.rows() < 1) {
    throw std::invalid_argument("contraction_coreset: need at least one point");
  }
  Matrix lifted(points.rows(), kernel::outer_power_vec(points.row(0).transpose(), p).size());
  for (Index i = 0; i < points.rows(); ++i) {
    lifted.row(i) = kernel::outer_power_vec(points.row(i).transpose(), p).transpose();
  }
  const Index cluster_count =
      clusters.value_or(caratheodory::default_cluster_count(lifted.cols(), lifted.rows()));
  return caratheodory::fast_caratheodory(caratheodory::WeightedPointSet::uniform(lifted),
                                         cluster_count);
}

TensorDecomposition decompose_symmetric3(const Vector& flat_tensor, Index k, int restarts, int iters,
                                         std::uint64_t seed) {
  if (k < 1 || flat_tensor.size() != k * k * k) {
    throw std::invalid_argument("decompose_symmetric3: tensor size must be k^3");
  }
  if (restarts < 1 || iters < 1) {
    throw std::invalid_argument("decompose_symmetric3: restarts and iters must be >= 1");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector deflated = flat_tensor;

  TensorDecomposition result;
  result.pairs.reserve(static_cast<std::size_t>(k));

  for (Index component = 0; component < k; ++component) {
    TensorEigenpair best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
      Vector x(k);
      for (Index j = 0; j < k; ++j) x(j) = normal(rng);
      x.normalize();

      bool converged = false;
      int used = 0;
      for (int it = 0; it < iters; ++it) {
        ++used;
        Vector next = contract_two(deflated, x);
        const double norm = next.norm();
        if (norm < 1e-300) break;  // tensor exhausted along this start
        next /= norm;
        const double delta = (next - x).norm();
        x = next;
        if (delta < kConvergenceTol) {
          converged = true;
          break;
        }
      }
      const double value = contract_two(deflated, x).dot(x);
      if (!have_best || value > best.eigenvalue) {
        best = {value, x, converged, used};
        have_best = true;
      }
    }

    // (lambda, v) and (-lambda, -v) are the same component; keep the
    // nonnegative-eigenvalue representative.
    if (best.eigenvalue < 0.0) {
      best.eigenvalue = -best.eigenvalue;
      best.eigenvector = -best.eigenvector;
    }
    if (best.eigenvalue == 0.0) {
      Index top = 0;
      best.eigenvector.cwiseAbs().maxCoeff(&top);
      if (best.eigenvector(top) < 0.0) best.eigenvector = -best.eigenvector;
    }

    result.all_converged = result.all_converged && best.converged;
    deflated -= best.eigenvalue * kernel::outer_power_vec(best.eigenvector, 3);
    result.pairs.push_back(std::move(best));
  }
  return result;
}

TensorDecomposition tensor_power_decompose(const WhitenedTensorKernel& kernel, int restarts, int iters,
                                           std::uint64_t seed) {
  return decompose_symmetric3(whitened_tensor(kernel), kernel.k, restarts, iters, seed);
}

LatentParameters recover_parameters(const TensorDecomposition& decomposition,
                                    const WhiteningMatrix& whitening) {
  const Index k = whitening.m.cols();
  if (static_cast<Index>(decomposition.pairs.size()) < k) {
    throw std::invalid_argument("recover_parameters: need k eigenpairs");
  }

  // (M^T)^+ = V_k S_k^{1/2} = M diag(spectrum).
  const Matrix unwhiten = whitening.m * whitening.source_spectrum.asDiagonal();

  LatentParameters params;
  params.weights.resize(k);
  params.components.resize(whitening.m.rows(), k);
  for (Index j = 0; j < k; ++j) {
    const TensorEigenpair& pair = decomposition.pairs[static_cast<std::size_t>(j)];
    if (pair.eigenvalue <= 0.0) {
      throw numerical_error("recover_parameters: nonpositive eigenvalue for component " +
                            std::to_string(j));
    }
    params.weights(j) = 1.0 / (pair.eigenvalue * pair.eigenvalue);
    params.components.col(j) = pair.eigenvalue * (unwhiten * pair.eigenvector);
  }
  return params;
}

}  // namespace coreset::lvm
