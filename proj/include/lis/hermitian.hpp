#pragma once

// Cholesky-based kernels for Hermitian positive-definite matrices.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lis/errors.hpp"
#include "lis/matrix.hpp"

namespace lis {

/// Lower-triangular L with A = L L^H. Throws NumericalError naming the first
/// non-positive pivot.
inline ComplexMatrix cholesky(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix is not square");
  require_finite(a, "cholesky");
  const std::size_t n = a.rows();
  ComplexMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) {
      throw NumericalError("matrix is not positive definite: non-positive pivot at index " + std::to_string(j) +
                           " (value " + std::to_string(d) + ")");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Solves L X = B in place (L lower triangular).
inline void forward_substitute(const ComplexMatrix& l, ComplexMatrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    auto x = b.col(c);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
      x[i] = s / l(i, i);
    }
  }
}

/// Solves L^H X = B in place.
inline void backward_substitute_adjoint(const ComplexMatrix& l, ComplexMatrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    auto x = b.col(c);
    for (std::size_t i = n; i-- > 0;) {
      cplx s = x[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= std::conj(l(k, i)) * x[k];
      x[i] = s / l(i, i);
    }
  }
}

/// A^{-1} B for Hermitian positive-definite A.
inline ComplexMatrix hermitian_solve(const ComplexMatrix& a, ComplexMatrix b) {
  if (b.rows() != a.rows()) throw DimensionError("hermitian_solve: right-hand side has wrong row count");
  const ComplexMatrix l = cholesky(a);
  forward_substitute(l, b);
  backward_substitute_adjoint(l, b);
  return b;
}

/// log2 det(A) for Hermitian positive-definite A.
inline double logdet_hermitian_pd(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("logdet_hermitian_pd: matrix is not square");
  require_finite(a, "logdet_hermitian_pd");
  if (!is_hermitian(a, 1e-9)) {
    throw NumericalError("logdet_hermitian_pd: matrix is not Hermitian (defect " +
                         std::to_string(hermitian_defect(a)) + ")");
  }
  const ComplexMatrix l = cholesky(a);
  double sum = 0.0;
  for (std::size_t j = 0; j < l.rows(); ++j) sum += 2.0 * std::log2(l(j, j).real());
  return sum;
}

}  // namespace lis
