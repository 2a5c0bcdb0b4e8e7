#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "coreset/lvm.hpp"
#include "test_util.hpp"

using namespace coreset;
using lvm::MomentModel;
using numerics::Index;
using numerics::Matrix;
using numerics::Vector;

namespace {

/// Entrywise third-moment oracle, independent of the kernel layout.
Vector direct_whitened_tensor(const Matrix& x, const Matrix& whiten) {
  const Index n = x.rows();
  const Index k = whiten.cols();
  const Matrix z = x * whiten;
  Vector t = Vector::Zero(k * k * k);
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) {
        for (Index c = 0; c < k; ++c) {
          t(a * k * k + b * k + c) += z(i, a) * z(i, b) * z(i, c);
        }
      }
    }
  }
  return t / static_cast<double>(n);
}

/// Noiseless single-topic corpus: each document's row is exactly its
/// topic's word distribution, with exact topic proportions.
struct PlantedCorpus {
  Matrix x;
  Matrix topics;  // d x k columns
  Vector mixture;
};

PlantedCorpus planted_corpus(Index n, Index d, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.05, 1.0);
  PlantedCorpus corpus;
  corpus.topics.resize(d, k);
  for (Index j = 0; j < k; ++j) {
    Vector topic(d);
    for (Index t = 0; t < d; ++t) topic(t) = uniform(rng);
    corpus.topics.col(j) = topic / topic.sum();
  }
  corpus.mixture.resize(k);
  corpus.mixture << 0.6, 0.4;

  corpus.x.resize(n, d);
  Index row = 0;
  for (Index j = 0; j < k; ++j) {
    const Index count = static_cast<Index>(std::round(corpus.mixture(j) * static_cast<double>(n)));
    for (Index i = 0; i < count && row < n; ++i, ++row) {
      corpus.x.row(row) = corpus.topics.col(j).transpose();
    }
  }
  for (; row < n; ++row) corpus.x.row(row) = corpus.topics.col(k - 1).transpose();
  return corpus;
}

}  // namespace

TEST_CASE("second_moment basics") {
  Matrix e1 = Matrix::Zero(1, 3);
  e1(0, 0) = 1.0;
  const Matrix t1 = lvm::second_moment(e1);
  CHECK(t1(0, 0) == 1.0);
  CHECK(t1.norm() == doctest::Approx(1.0));

  Matrix two = Matrix::Zero(2, 2);
  two(0, 0) = 1.0;
  two(1, 1) = 1.0;
  const Matrix t2 = lvm::second_moment(two);
  CHECK(t2(0, 0) == doctest::Approx(0.5));
  CHECK(t2(1, 1) == doctest::Approx(0.5));
  CHECK(t2(0, 1) == 0.0);

  const Matrix random = testutil::random_matrix(20, 4, 301);
  const Matrix t = lvm::second_moment(random);
  CHECK((t - t.transpose()).norm() == 0.0);
}

TEST_CASE("whitening_matrix on diagonal and identity inputs") {
  const auto id = lvm::whitening_matrix(Matrix::Identity(3, 3), 3);
  CHECK((id.m.transpose() * id.m - Matrix::Identity(3, 3)).norm() <= 1e-10);

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 1.0;
  const auto w = lvm::whitening_matrix(diag, 2);
  CHECK(std::abs(w.m.col(0).cwiseAbs().maxCoeff() - 0.5) <= 1e-12);
  CHECK(std::abs(w.m.col(1).cwiseAbs().maxCoeff() - 1.0) <= 1e-12);
  CHECK((w.m.transpose() * diag * w.m - Matrix::Identity(2, 2)).norm() <= 1e-8);
  CHECK(w.source_spectrum(0) == doctest::Approx(4.0));
}

TEST_CASE("whitening_matrix satisfies its defining property on random PSD input") {
  for (std::uint64_t seed : {311u, 312u, 313u}) {
    const Matrix base = testutil::random_matrix(6, 3, seed);
    const Matrix t2 = base * base.transpose() / 6.0;  // rank 3 PSD
    const auto w = lvm::whitening_matrix(t2, 3);
    CHECK((w.m.transpose() * t2 * w.m - Matrix::Identity(3, 3)).norm() <= 1e-8);
  }
}

TEST_CASE("whitening_matrix rejects rank-deficient input") {
  Matrix t2 = Matrix::Zero(3, 3);
  t2(0, 0) = 1.0;
  CHECK_THROWS_AS(lvm::whitening_matrix(t2, 2), numerical_error);
  CHECK_THROWS_AS(lvm::whitening_matrix(testutil::random_matrix(3, 4, 320), 2),
                  std::invalid_argument);
}

TEST_CASE("lvm kernel rank and column sums") {
  const MomentModel model{testutil::random_matrix(300, 8, 330), 2};
  const auto kernel = lvm::build_lvm_kernel(model);
  CHECK(kernel.rows.rows() == 300);
  CHECK(kernel.rows.cols() == 8);

  const Index rank = numerics::effective_rank(numerics::thin_svd(kernel.rows));
  CHECK(rank <= 4);  // C(4,3)

  const Vector sums = lvm::whitened_tensor(kernel);
  const Vector oracle = direct_whitened_tensor(model.x, kernel.whitening.m);
  CHECK((sums - oracle).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + oracle.norm()));
}

TEST_CASE("single-sample kernel is the lifted row itself") {
  Matrix x(2, 3);
  x << 1.0, 0.5, -0.25,
       0.2, 1.5, 0.75;
  const MomentModel model{x, 2};
  const auto kernel = lvm::build_lvm_kernel(model);
  const Matrix z = model.x * kernel.whitening.m;
  const Vector row0 = kernel::outer_power_vec(z.row(0).transpose(), 3) / 2.0;
  CHECK((kernel.rows.row(0).transpose() - row0).norm() == 0.0);
}

TEST_CASE("lvm coreset sizes and moment preservation") {
  const MomentModel model{testutil::random_matrix(2000, 10, 340), 3};
  const auto kernel = lvm::build_lvm_kernel(model);
  const auto sel = lvm::lvm_coreset(kernel);
  CHECK(sel.size() <= 11);  // C(5,3) + 1

  const Vector full = lvm::whitened_tensor(kernel);
  const Vector reduced = lvm::whitened_tensor(kernel, sel);
  CHECK((full - reduced).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + full.norm()));

  const MomentModel wider{testutil::random_matrix(3000, 12, 341), 4};
  const auto sel4 = lvm::lvm_coreset(wider);
  CHECK(sel4.size() <= 21);  // C(6,3) + 1
}

TEST_CASE("contraction is preserved by the coreset") {
  const MomentModel model{testutil::random_matrix(1500, 9, 350), 3};
  const auto kernel = lvm::build_lvm_kernel(model);
  const auto sel = lvm::lvm_coreset(kernel);

  const Matrix z = model.x * kernel.whitening.m;
  const Vector uniform = Vector::Constant(model.n(), 1.0 / static_cast<double>(model.n()));
  Matrix zc(sel.size(), model.k);
  Vector wc(sel.size());
  for (Index i = 0; i < sel.size(); ++i) {
    zc.row(i) = z.row(sel.indices[static_cast<std::size_t>(i)]);
    wc(i) = sel.weights(i) / static_cast<double>(model.n());
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Vector q = testutil::random_vector(model.k, 3000 + trial);
    const double full = lvm::tensor_contract(z, uniform, q, 3);
    const double reduced = lvm::tensor_contract(zc, wc, q, 3);
    CHECK(std::abs(full - reduced) <= 1e-8 * (1.0 + std::abs(full)));
  }
}

TEST_CASE("tensor_contract hand cases") {
  Matrix e1 = Matrix::Zero(1, 2);
  e1(0, 0) = 1.0;
  Vector x(2);
  x << 1.0, 0.0;
  CHECK(lvm::tensor_contract(e1, Vector::Ones(1), x, 3) == 1.0);

  Matrix two(2, 2);
  two << 1, 0,
         0, 1;
  Vector q(2);
  q << 1.0, 1.0;
  CHECK(lvm::tensor_contract(two, Vector::Ones(2), q, 3) == doctest::Approx(2.0));

  CHECK_THROWS_AS(lvm::tensor_contract(two, Vector::Ones(3), q, 3), std::invalid_argument);
  CHECK_THROWS_AS(lvm::tensor_contract(two, Vector::Ones(2), Vector::Ones(3), 3),
                  std::invalid_argument);
}

TEST_CASE("power iteration recovers a planted orthogonal tensor") {
  Matrix basis(2, 2);
  basis << std::sqrt(0.5), std::sqrt(0.5),
           std::sqrt(0.5), -std::sqrt(0.5);
  const Vector planted = 2.0 * kernel::outer_power_vec(basis.col(0), 3) +
                         1.0 * kernel::outer_power_vec(basis.col(1), 3);

  const auto decomposition = lvm::decompose_symmetric3(planted, 2, 10, 100, 99);
  REQUIRE(decomposition.pairs.size() == 2);
  CHECK(decomposition.all_converged);

  CHECK(std::abs(decomposition.pairs[0].eigenvalue - 2.0) <= 1e-6);
  CHECK(std::abs(decomposition.pairs[1].eigenvalue - 1.0) <= 1e-6);
  CHECK(std::abs(std::abs(decomposition.pairs[0].eigenvector.dot(basis.col(0))) - 1.0) <= 1e-6);
  CHECK(std::abs(std::abs(decomposition.pairs[1].eigenvector.dot(basis.col(1))) - 1.0) <= 1e-6);
  for (const auto& pair : decomposition.pairs) {
    CHECK(std::abs(pair.eigenvector.norm() - 1.0) <= 1e-12);
  }

  // The reconstructed tensor reproduces the input's contractions.
  const Vector rebuilt =
      decomposition.pairs[0].eigenvalue * kernel::outer_power_vec(decomposition.pairs[0].eigenvector, 3) +
      decomposition.pairs[1].eigenvalue * kernel::outer_power_vec(decomposition.pairs[1].eigenvector, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector q = testutil::random_vector(2, 4000 + trial);
    const Vector lifted = kernel::outer_power_vec(q, 3);
    CHECK(std::abs(planted.dot(lifted) - rebuilt.dot(lifted)) <=
          1e-6 * (1.0 + std::abs(planted.dot(lifted))));
  }
}

TEST_CASE("decomposition is deterministic per seed") {
  const Vector tensor = testutil::random_vector(27, 360);
  const Vector symmetrized = [&] {
    Vector t = Vector::Zero(27);
    for (Index a = 0; a < 3; ++a)
      for (Index b = 0; b < 3; ++b)
        for (Index c = 0; c < 3; ++c) {
          double sum = 0.0;
          const Index perms[6] = {a * 9 + b * 3 + c, a * 9 + c * 3 + b, b * 9 + a * 3 + c,
                                  b * 9 + c * 3 + a, c * 9 + a * 3 + b, c * 9 + b * 3 + a};
          for (Index p : perms) sum += tensor(p);
          t(a * 9 + b * 3 + c) = sum / 6.0;
        }
    return t;
  }();
  const auto a = lvm::decompose_symmetric3(symmetrized, 3, 5, 60, 123);
  const auto b = lvm::decompose_symmetric3(symmetrized, 3, 5, 60, 123);
  for (std::size_t j = 0; j < a.pairs.size(); ++j) {
    CHECK(a.pairs[j].eigenvalue == b.pairs[j].eigenvalue);
    CHECK((a.pairs[j].eigenvector - b.pairs[j].eigenvector).norm() == 0.0);
  }
}

TEST_CASE("planted single-topic parameters are recovered") {
  const PlantedCorpus corpus = planted_corpus(1000, 12, 2, 370);
  const MomentModel model{corpus.x, 2};
  const auto kernel = lvm::build_lvm_kernel(model);
  const auto decomposition = lvm::tensor_power_decompose(kernel, 10, 200, 5);
  const auto params = lvm::recover_parameters(decomposition, kernel.whitening);

  // Match components to planted topics over both assignments.
  double best_tv = 1e9;
  double best_gamma_gap = 1e9;
  const Index perms[2][2] = {{0, 1}, {1, 0}};
  for (const auto& perm : perms) {
    double tv = 0.0;
    double gamma_gap = 0.0;
    for (Index j = 0; j < 2; ++j) {
      tv = std::max(tv, 0.5 * (params.components.col(perm[j]) - corpus.topics.col(j))
                              .cwiseAbs()
                              .sum());
      gamma_gap = std::max(gamma_gap, std::abs(params.weights(perm[j]) - corpus.mixture(j)));
    }
    if (tv < best_tv) {
      best_tv = tv;
      best_gamma_gap = gamma_gap;
    }
  }
  CHECK(best_tv <= 1e-3);
  CHECK(best_gamma_gap <= 1e-3);
  CHECK(std::abs(params.weights.sum() - 1.0) <= 1e-3);
}

TEST_CASE("recovery from the coreset matches recovery from the full data") {
  const PlantedCorpus corpus = planted_corpus(1200, 12, 2, 380);
  const MomentModel model{corpus.x, 2};
  const auto kernel = lvm::build_lvm_kernel(model);
  const auto sel = lvm::lvm_coreset(kernel);
  CHECK(sel.size() <= 5);  // C(4,3) + 1

  const Vector full_t = lvm::whitened_tensor(kernel);
  const Vector core_t = lvm::whitened_tensor(kernel, sel);
  const auto full = lvm::decompose_symmetric3(full_t, 2, 10, 200, 11);
  const auto reduced = lvm::decompose_symmetric3(core_t, 2, 10, 200, 11);
  const auto full_params = lvm::recover_parameters(full, kernel.whitening);
  const auto core_params = lvm::recover_parameters(reduced, kernel.whitening);

  CHECK((full_params.weights - core_params.weights).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((full_params.components - core_params.components).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("contraction_coreset meets the p-order size bound") {
  for (int p : {2, 3, 4}) {
    const Matrix points = testutil::random_matrix(400, 3, 400 + p);
    const auto sel = lvm::contraction_coreset(points, p);
    CHECK(sel.size() <= kernel::multiset_count(3, p) + 1);

    const Vector uniform = Vector::Ones(points.rows());
    Matrix selected(sel.size(), 3);
    Vector weights(sel.size());
    for (Index i = 0; i < sel.size(); ++i) {
      selected.row(i) = points.row(sel.indices[static_cast<std::size_t>(i)]);
      weights(i) = sel.weights(i);
    }
    for (int trial = 0; trial < 50; ++trial) {
      const Vector q = testutil::random_vector(3, 5000 + trial);
      const double full = lvm::tensor_contract(points, uniform, q, p);
      const double reduced = lvm::tensor_contract(selected, weights, q, p);
      CHECK(std::abs(full - reduced) <= 1e-8 * (1.0 + std::abs(full)));
    }
  }
}

TEST_CASE("recover_parameters rejects nonpositive eigenvalues") {
  lvm::WhiteningMatrix whitening;
  whitening.m = Matrix::Identity(3, 2);
  whitening.source_spectrum = Vector::Ones(2);
  lvm::TensorDecomposition decomposition;
  decomposition.pairs.push_back({1.5, Vector::Unit(2, 0), true, 1});
  decomposition.pairs.push_back({0.0, Vector::Unit(2, 1), true, 1});
  CHECK_THROWS_AS(lvm::recover_parameters(decomposition, whitening), numerical_error);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(lvm::build_lvm_kernel({testutil::random_matrix(10, 3, 390), 3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lvm::build_lvm_kernel({testutil::random_matrix(10, 3, 391), 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lvm::build_lvm_kernel({testutil::random_matrix(1, 3, 392), 2}),
                  std::invalid_argument);
}
