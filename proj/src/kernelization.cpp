#include "coreset/kernelization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace coreset::kernel {

namespace {

Index checked_row_size(Index d_aug, int p) {
  Index size = 1;
  for (int i = 0; i < p; ++i) {
    if (size > kMaxKernelRowSize / d_aug) {
      throw input_error("kernel row size d_aug^p exceeds the supported limit of " +
                        std::to_string(kMaxKernelRowSize) + " entries");
    }
    size *= d_aug;
  }
  return size;
}

}  // namespace

Index flat_index(const std::vector<Index>& multi, Index d_aug) {
  Index flat = 0;
  for (Index digit : multi) {
    flat = flat * d_aug + digit;
  }
  return flat;
}

std::vector<Index> multi_index(Index flat, Index d_aug, int p) {
  std::vector<Index> multi(static_cast<std::size_t>(p));
  for (int j = p - 1; j >= 0; --j) {
    multi[static_cast<std::size_t>(j)] = flat % d_aug;
    flat /= d_aug;
  }
  return multi;
}

Vector outer_power_vec(const Vector& x, int p) {
  if (p < 1) {
    throw std::invalid_argument("outer_power_vec: p must be >= 1");
  }
  const Index d = x.size();
  if (d == 0) return Vector(0);
  const Index size = checked_row_size(d, p);

  // Multiply each tuple in sorted index order so entries at permuted
  // multi-indices are bitwise equal; the sign-tensor cancellations then
  // hold exactly.
  Vector result(size);
  std::vector<Index> digits(static_cast<std::size_t>(p));
  for (Index flat = 0; flat < size; ++flat) {
    Index rest = flat;
    for (int j = p - 1; j >= 0; --j) {
      digits[static_cast<std::size_t>(j)] = rest % d;
      rest /= d;
    }
    std::sort(digits.begin(), digits.end());
    double prod = 1.0;
    for (Index digit : digits) prod *= x(digit);
    result(flat) = prod;
  }
  return result;
}

SignTensorDiagonal ridge_sign_matrix(Index d) {
  if (d < 1) {
    throw std::invalid_argument("ridge_sign_matrix: d must be >= 1");
  }
  const Index d_aug = d + 1;
  SignTensorDiagonal t{d_aug, 2, Vector(d_aug * d_aug)};
  for (Index i = 0; i < d_aug; ++i) {
    for (Index j = 0; j < d_aug; ++j) {
      double value = 1.0;
      if (i < j) value = -1.0;
      if (i == d && j == d) value = 0.0;  // label slot
      t.diag(i * d_aug + j) = value;
    }
  }
  return t;
}

SignTensorDiagonal ridge_sign_matrix_unlabeled(Index d) {
  if (d < 1) {
    throw std::invalid_argument("ridge_sign_matrix_unlabeled: d must be >= 1");
  }
  SignTensorDiagonal t{d, 2, Vector(d * d)};
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      t.diag(i * d + j) = i < j ? -1.0 : 1.0;
    }
  }
  return t;
}

SignTensorDiagonal lp_sign_tensor(Index d, int p) {
  if (d < 1) {
    throw std::invalid_argument("lp_sign_tensor: d must be >= 1");
  }
  if (p < 2 || p % 2 != 0) {
    throw std::invalid_argument("lp_sign_tensor: p must be even and >= 2");
  }
  const Index d_aug = d + 1;
  const Index size = checked_row_size(d_aug, p);

  // Group flat positions by the sorted multi-index. Iterating flat
  // positions in order lists each class's permutations lexicographically.
  std::map<Index, std::vector<Index>> classes;
  for (Index flat = 0; flat < size; ++flat) {
    std::vector<Index> multi = multi_index(flat, d_aug, p);
    std::sort(multi.begin(), multi.end());
    classes[flat_index(multi, d_aug)].push_back(flat);
  }

  SignTensorDiagonal t{d_aug, p, Vector::Zero(size)};
  for (const auto& [key, members] : classes) {
    if (members.size() == 1) {
      // All indices equal: +1 on data slots, 0 on the label slot.
      const Index symbol = multi_index(members.front(), d_aug, p).front();
      t.diag(members.front()) = symbol < d ? 1.0 : 0.0;
      continue;
    }
    std::size_t begin = 0;
    if (members.size() % 2 != 0) {
      t.diag(members[0]) = 0.0;  // odd class: zero the first permutation
      begin = 1;
    }
    const std::size_t half = (members.size() - begin) / 2;
    for (std::size_t i = begin; i < members.size(); ++i) {
      t.diag(members[i]) = (i - begin) < half ? -1.0 : 1.0;
    }
  }
  return t;
}

KernelMatrix build_regression_kernel(const Matrix& x, const Vector& y, double lambda, int p,
                                     RegularizerForm form) {
  if (x.rows() < 1) {
    throw std::invalid_argument("build_regression_kernel: need at least one sample");
  }
  if (y.size() != x.rows()) {
    throw std::invalid_argument("build_regression_kernel: x and y row counts differ");
  }
  if (p < 2 || p % 2 != 0) {
    throw std::invalid_argument("build_regression_kernel: p must be even and >= 2");
  }
  if (lambda < 0.0) {
    throw std::invalid_argument("build_regression_kernel: lambda must be >= 0");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw input_error("build_regression_kernel: non-finite entries in input");
  }
  if (form == RegularizerForm::basis_outer && p != 2) {
    throw std::invalid_argument("build_regression_kernel: basis_outer form requires p = 2");
  }

  const Index n = x.rows();
  const Index d = x.cols();
  const Index d_aug = d + 1;
  const Index row_size = checked_row_size(d_aug, p);

  SignTensorDiagonal sign;
  Index reg_rows = 0;
  if (lambda > 0.0) {
    if (form == RegularizerForm::sign_diagonal) {
      sign = lp_sign_tensor(d, p);
      reg_rows = (sign.diag.array() != 0.0).count();
    } else {
      reg_rows = d;
    }
  }

  KernelMatrix k;
  k.d_aug = d_aug;
  k.p = p;
  k.lambda = lambda;
  k.data_row_count = n;
  k.rows.resize(n + reg_rows, row_size);
  k.provenance.reserve(static_cast<std::size_t>(n + reg_rows));

  Vector sample(d_aug);
  for (Index i = 0; i < n; ++i) {
    sample.head(d) = x.row(i).transpose();
    sample(d) = y(i);
    k.rows.row(i) = outer_power_vec(sample, p).transpose();
    k.provenance.push_back({RowProvenance::Kind::data, i, 0.0});
  }

  if (lambda > 0.0) {
    k.rows.bottomRows(reg_rows).setZero();
    Index r = n;
    if (form == RegularizerForm::sign_diagonal) {
      for (Index j = 0; j < row_size; ++j) {
        const double s = sign.diag(j);
        if (s == 0.0) continue;
        k.rows(r, j) = lambda * s;
        k.provenance.push_back({RowProvenance::Kind::regularizer, j, s});
        ++r;
      }
    } else {
      for (Index i = 0; i < d; ++i) {
        const Index j = i * d_aug + i;
        k.rows(r, j) = lambda;
        k.provenance.push_back({RowProvenance::Kind::regularizer, j, 1.0});
        ++r;
      }
    }
  }
  return k;
}

Index multiset_count(Index symbols, int p) {
  // C(symbols + p - 1, p) without overflow for the sizes in play.
  Index result = 1;
  for (int i = 1; i <= p; ++i) {
    result = result * (symbols + p - i) / i;
  }
  return result;
}

}  // namespace coreset::kernel
