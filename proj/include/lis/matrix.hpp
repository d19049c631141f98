#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lis/errors.hpp"

namespace lis {

using cplx = std::complex<double>;

namespace kernel {

// Hot loops avoid std::complex operator* so that the compiler does not emit
// the Annex G NaN-recovery path for every product.

/// sum_i conj(a_i) * b_i
inline cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
  double re = 0.0, im = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

inline double norm2(std::span<const cplx> a) {
  double s = 0.0;
  for (const cplx& v : a) s += v.real() * v.real() + v.imag() * v.imag();
  return s;
}

/// y += alpha * x
inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  const double ar = alpha.real(), ai = alpha.imag();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
  }
}

inline void scale(cplx alpha, std::span<cplx> x) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (cplx& v : x) {
    const double vr = v.real(), vi = v.imag();
    v = {ar * vr - ai * vi, ar * vi + ai * vr};
  }
}

}  // namespace kernel

/// Dense complex matrix, column-major storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  /// Column-major data; rejects non-finite entries.
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("ComplexMatrix: data size " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    if (!all_finite()) throw NumericalError("ComplexMatrix: non-finite entry on construction");
  }

  /// Row-wise literal, e.g. from_rows({{1, 2}, {3, 4}}).
  static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<cplx> data(r * c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ComplexMatrix::from_rows: ragged rows");
      std::size_t j = 0;
      for (const cplx& v : row) data[j++ * r + i] = v;
      ++i;
    }
    return ComplexMatrix(r, c, std::move(data));
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }
  const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }

  std::span<cplx> col(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }
  std::span<const cplx> col(std::size_t c) const noexcept { return {data_.data() + c * rows_, rows_}; }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
  }

  double frobenius_norm2() const noexcept { return kernel::norm2(data_); }
  double frobenius_norm() const noexcept { return std::sqrt(frobenius_norm2()); }

  double max_abs() const noexcept {
    double m = 0.0;
    for (const cplx& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t c = 0; c < cols_; ++c)
      for (std::size_t r = 0; r < rows_; ++r) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  ComplexMatrix& operator*=(cplx s) {
    kernel::scale(s, data_);
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

  bool operator==(const ComplexMatrix&) const = default;

 private:
  void require_same_shape(const ComplexMatrix& o, const char* op) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) {
      throw DimensionError(std::string("ComplexMatrix ") + op + ": shape mismatch " + std::to_string(rows_) +
                           "x" + std::to_string(cols_) + " vs " + std::to_string(o.rows_) + "x" +
                           std::to_string(o.cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

inline void require_finite(const ComplexMatrix& a, const std::string& what) {
  if (!a.all_finite()) throw NumericalError(what + ": non-finite entry in input");
}

/// A * B
inline ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) kernel::axpy(b(k, j), a.col(k), c.col(j));
  return c;
}

/// A^H * B
inline ComplexMatrix adjoint_multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("adjoint_multiply: row counts " + std::to_string(a.rows()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  ComplexMatrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = kernel::dotc(a.col(i), b.col(j));
  return c;
}

/// A * B^H
inline ComplexMatrix multiply_adjoint(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("multiply_adjoint: column counts " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.cols()) + " differ");
  }
  ComplexMatrix c(a.rows(), b.rows());
  for (std::size_t k = 0; k < a.cols(); ++k)
    for (std::size_t j = 0; j < b.rows(); ++j) kernel::axpy(std::conj(b(j, k)), a.col(k), c.col(j));
  return c;
}

/// A^H * A, exactly Hermitian.
inline ComplexMatrix gram(const ComplexMatrix& a) {
  const std::size_t n = a.cols();
  ComplexMatrix g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      g(i, j) = kernel::dotc(a.col(i), a.col(j));
      g(j, i) = std::conj(g(i, j));
    }
    g(j, j) = kernel::norm2(a.col(j));
  }
  return g;
}

/// Matrix-vector product A * x.
inline std::vector<cplx> multiply(const ComplexMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("multiply: matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                         std::to_string(x.size()) + " entries");
  }
  std::vector<cplx> y(a.rows());
  for (std::size_t k = 0; k < a.cols(); ++k) kernel::axpy(x[k], a.col(k), y);
  return y;
}

/// Rows of `a` listed in `indices`, in that order.
inline ComplexMatrix gather_rows(const ComplexMatrix& a, std::span<const std::size_t> indices) {
  ComplexMatrix out(indices.size(), a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const auto src = a.col(c);
    auto dst = out.col(c);
    for (std::size_t r = 0; r < indices.size(); ++r) dst[r] = src[indices[r]];
  }
  return out;
}

/// Largest |A(i,j) - conj(A(j,i))|.
inline double hermitian_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i <= j; ++i) d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
  return d;
}

/// Hermitian within `tol` relative to max(1, max|A|).
inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-9) {
  return hermitian_defect(a) <= tol * std::max(1.0, a.max_abs());
}

}  // namespace lis
