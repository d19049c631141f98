#pragma once

// Economy SVD of a dense complex matrix.
//
// Tall inputs are reduced by a Householder QR first; the square factor is then
// diagonalized by one-sided (Hestenes) Jacobi rotations, which are accurate to
// working precision and fully deterministic. Wide inputs go through A^H.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lis/errors.hpp"
#include "lis/matrix.hpp"

namespace lis {

/// A = U * diag(S) * V^H with U (m x r), V (n x r), r = min(m, n), S descending.
struct SvdResult {
  ComplexMatrix U;
  std::vector<double> S;
  ComplexMatrix V;
};

namespace detail {

inline constexpr int kMaxJacobiSweeps = 80;

/// Householder reflectors of a tall matrix; R is the leading n x n upper triangle.
struct HouseholderQr {
  std::vector<std::vector<cplx>> reflectors;  // reflector k acts on rows k..m-1, unit norm (or empty)
  ComplexMatrix R;
  std::size_t m = 0;
};

inline HouseholderQr householder_qr(ComplexMatrix a) {
  const std::size_t m = a.rows(), n = a.cols();
  HouseholderQr qr;
  qr.m = m;
  qr.reflectors.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::span<cplx> x = a.col(k).subspan(k);
    const double xnorm = std::sqrt(kernel::norm2(x));
    if (xnorm == 0.0) continue;
    const double x0abs = std::abs(x[0]);
    const cplx phase = x0abs > 0.0 ? x[0] / x0abs : cplx{1.0, 0.0};
    const cplx alpha = -phase * xnorm;
    std::vector<cplx> v(x.begin(), x.end());
    v[0] -= alpha;
    const double vnorm = std::sqrt(kernel::norm2(v));
    for (cplx& e : v) e /= vnorm;
    for (std::size_t j = k; j < n; ++j) {
      std::span<cplx> cj = a.col(j).subspan(k);
      const cplx proj = kernel::dotc(v, cj);
      kernel::axpy(-2.0 * proj, v, cj);
    }
    qr.reflectors[k] = std::move(v);
  }
  qr.R = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) qr.R(i, j) = a(i, j);
  return qr;
}

/// Q * [X; 0] where X has n rows; returns m x X.cols().
inline ComplexMatrix apply_q(const HouseholderQr& qr, const ComplexMatrix& x) {
  ComplexMatrix out(qr.m, x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c)
    std::copy(x.col(c).begin(), x.col(c).end(), out.col(c).begin());
  for (std::size_t k = qr.reflectors.size(); k-- > 0;) {
    const auto& v = qr.reflectors[k];
    if (v.empty()) continue;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      std::span<cplx> cc = out.col(c).subspan(k);
      const cplx proj = kernel::dotc(v, cc);
      kernel::axpy(-2.0 * proj, v, cc);
    }
  }
  return out;
}

/// Apply the unitary column rotation [p q] <- [p q] * [[c, s e], [-s conj(e), c]].
inline void rotate_columns(std::span<cplx> p, std::span<cplx> q, double c, double s, cplx e) {
  const double er = e.real(), ei = e.imag();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pr = p[i].real(), pi = p[i].imag();
    const double qr = q[i].real(), qi = q[i].imag();
    // conj(e) * q and e * p
    const double cq_r = er * qr + ei * qi, cq_i = er * qi - ei * qr;
    const double ep_r = er * pr - ei * pi, ep_i = er * pi + ei * pr;
    p[i] = {c * pr - s * cq_r, c * pi - s * cq_i};
    q[i] = {s * ep_r + c * qr, s * ep_i + c * qi};
  }
}

/// One-sided Jacobi on the columns of `b`; on return the columns of b are
/// mutually orthogonal and b_in = b_out * v^H. `v` may be null when the
/// right vectors are not wanted. Each step pivots the largest remaining
/// column forward (de Rijk ordering).
inline void one_sided_jacobi(ComplexMatrix& b, ComplexMatrix* v) {
  const std::size_t n = b.cols();
  const double tol = std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(std::max<std::size_t>(b.rows(), 1)));
  std::vector<double> norms(n);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    for (std::size_t j = 0; j < n; ++j) norms[j] = kernel::norm2(b.col(j));
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      const auto big = static_cast<std::size_t>(std::max_element(norms.begin() + static_cast<std::ptrdiff_t>(p), norms.end()) -
                                                norms.begin());
      if (big != p) {
        std::swap_ranges(b.col(p).begin(), b.col(p).end(), b.col(big).begin());
        if (v) std::swap_ranges(v->col(p).begin(), v->col(p).end(), v->col(big).begin());
        std::swap(norms[p], norms[big]);
      }
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norms[p], beta = norms[q];
        if (alpha == 0.0 || beta == 0.0) continue;
        const cplx gamma = kernel::dotc(b.col(p), b.col(q));
        const double g = std::abs(gamma);
        if (g <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const cplx e = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_columns(b.col(p), b.col(q), c, s, e);
        if (v) rotate_columns(v->col(p), v->col(q), c, s, e);
        norms[p] = alpha - t * g;
        norms[q] = beta + t * g;
      }
    }
    if (!rotated) return;
  }
  throw NumericalError("svd: one-sided Jacobi did not converge within " + std::to_string(kMaxJacobiSweeps) +
                       " sweeps");
}

/// Replace column j of u by a unit vector orthogonal to the columns listed in `basis`.
inline void complete_column(ComplexMatrix& u, std::size_t j, std::span<const std::size_t> basis) {
  const std::size_t n = u.rows();
  std::vector<cplx> best;
  double best_norm = -1.0;
  std::vector<cplx> cand(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::fill(cand.begin(), cand.end(), cplx{});
    cand[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t l : basis) kernel::axpy(-kernel::dotc(u.col(l), cand), u.col(l), cand);
    const double nrm = std::sqrt(kernel::norm2(cand));
    if (nrm > best_norm) {
      best_norm = nrm;
      best = cand;
    }
  }
  if (best_norm <= 0.0) throw NumericalError("svd: cannot complete orthonormal basis");
  for (cplx& e : best) e /= best_norm;
  std::copy(best.begin(), best.end(), u.col(j).begin());
}

enum class SvdJob { full, left };

/// SVD of a square matrix by one-sided Jacobi; columns sorted by descending S.
/// SvdJob::left leaves V empty.
inline SvdResult square_svd(ComplexMatrix b, SvdJob job) {
  const std::size_t n = b.cols();
  const bool want_v = job == SvdJob::full;
  ComplexMatrix v = want_v ? ComplexMatrix::identity(n) : ComplexMatrix();
  one_sided_jacobi(b, want_v ? &v : nullptr);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(kernel::norm2(b.col(j)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return sigma[a] > sigma[c]; });

  SvdResult r{ComplexMatrix(n, n), std::vector<double>(n), want_v ? ComplexMatrix(n, n) : ComplexMatrix()};
  const double smax = n > 0 ? sigma[order[0]] : 0.0;
  std::vector<std::size_t> good;
  std::vector<std::size_t> deficient;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    r.S[j] = sigma[src];
    if (want_v) std::copy(v.col(src).begin(), v.col(src).end(), r.V.col(j).begin());
    // Columns this small carry no reliable direction.
    if (sigma[src] == 0.0 || sigma[src] < smax * 1e-150) {
      deficient.push_back(j);
      continue;
    }
    auto dst = r.U.col(j);
    const auto col = b.col(src);
    for (std::size_t i = 0; i < n; ++i) dst[i] = col[i] / sigma[src];
    good.push_back(j);
  }
  for (std::size_t j : deficient) {
    complete_column(r.U, j, good);
    good.push_back(j);
  }
  return r;
}

/// Make the largest-magnitude entry of each U column real and non-negative.
inline void fix_phases(SvdResult& r) {
  for (std::size_t j = 0; j < r.U.cols(); ++j) {
    auto u = r.U.col(j);
    std::size_t imax = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double a = std::abs(u[i]);
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (amax <= 0.0) continue;
    const cplx rot = std::conj(u[imax]) / amax;
    kernel::scale(rot, u);
    u[imax] = {std::abs(u[imax]), 0.0};
    if (!r.V.empty()) kernel::scale(rot, r.V.col(j));
  }
}

inline SvdResult tall_svd(const ComplexMatrix& a, SvdJob job) {
  if (a.rows() == a.cols()) return square_svd(a, job);
  HouseholderQr qr = householder_qr(a);
  SvdResult r = square_svd(std::move(qr.R), job);
  r.U = apply_q(qr, r.U);
  return r;
}

}  // namespace detail

/// Economy SVD. U and V columns are orthonormal, S is descending and
/// non-negative, and each left singular vector has its largest-magnitude entry
/// real and non-negative (the matching right vector is rotated accordingly).
/// Ties among equal singular values keep the Jacobi column order.
inline SvdResult svd(const ComplexMatrix& a) {
  if (a.empty()) throw DimensionError("svd: empty matrix");
  require_finite(a, "svd");
  SvdResult r;
  if (a.rows() >= a.cols()) {
    r = detail::tall_svd(a, detail::SvdJob::full);
  } else {
    SvdResult t = detail::tall_svd(a.adjoint(), detail::SvdJob::full);
    r = SvdResult{std::move(t.V), std::move(t.S), std::move(t.U)};
  }
  detail::fix_phases(r);
  return r;
}

/// Same U and S as svd() (bitwise) for inputs with rows >= cols, without
/// accumulating V; wide inputs fall back to the full decomposition.
inline SvdResult svd_left(const ComplexMatrix& a) {
  if (a.rows() < a.cols()) {
    SvdResult r = svd(a);
    r.V = ComplexMatrix();
    return r;
  }
  if (a.empty()) throw DimensionError("svd: empty matrix");
  require_finite(a, "svd");
  SvdResult r = detail::tall_svd(a, detail::SvdJob::left);
  detail::fix_phases(r);
  return r;
}

/// s -> 1/sqrt(max(s, floor_ratio * S[0])), element-wise.
inline std::vector<double> inv_sqrt_singular(std::span<const double> s, double floor_ratio = 1e-12) {
  if (s.empty()) throw DimensionError("inv_sqrt_singular: empty spectrum");
  if (!(s[0] > 0.0) || !std::isfinite(s[0]))
    throw NumericalError("inv_sqrt_singular: leading singular value is not positive (degenerate Z chain)");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0.0) || (i > 0 && s[i] > s[i - 1]))
      throw NumericalError("inv_sqrt_singular: spectrum must be non-negative and descending (index " +
                           std::to_string(i) + ")");
  }
  const double floor = floor_ratio * s[0];
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = std::max(s[i], floor);
    if (!(v > 0.0))
      throw NumericalError("inv_sqrt_singular: singular value " + std::to_string(i) +
                           " is zero and no floor is set");
    out[i] = 1.0 / std::sqrt(v);
  }
  return out;
}

}  // namespace lis
