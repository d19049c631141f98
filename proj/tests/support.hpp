#pragma once

// Shared fixtures for the test binaries: random matrices, Eigen bridges and
// small scenario configs.

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "lis/lis.hpp"

namespace lis::test {

using EMat = Eigen::MatrixXcd;

inline ComplexMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix a(rows, cols);
  for (auto& v : a.data()) v = rng.complex_normal();
  return a;
}

/// Hermitian positive definite: B^H B + shift * I.
inline ComplexMatrix random_hpd(Rng& rng, std::size_t n, double shift = 0.5) {
  ComplexMatrix z = gram(random_matrix(rng, n + 2, n));
  for (std::size_t i = 0; i < n; ++i) z(i, i) += shift;
  return z;
}

/// Random unitary from the QR of a Gaussian matrix.
inline ComplexMatrix random_unitary(Rng& rng, std::size_t n) {
  return svd(random_matrix(rng, n, n)).U;
}

inline EMat to_eigen(const ComplexMatrix& a) {
  EMat m(a.rows(), a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c)
    for (std::size_t r = 0; r < a.rows(); ++r) m(r, c) = a(r, c);
  return m;
}

inline ComplexMatrix from_eigen(const EMat& m) {
  ComplexMatrix a(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) a(r, c) = m(r, c);
  return a;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (to_eigen(a) - to_eigen(b)).cwiseAbs().maxCoeff();
}

/// log2 det(I + rho A^H C^{-1} A) by dense Eigen solves and eigenvalues.
inline double oracle_rate(const EMat& g, const EMat& c, double rho) {
  const EMat cinv_g = c.ldlt().solve(g);
  EMat t = rho * g.adjoint() * cinv_g;
  t = 0.5 * (t + t.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<EMat> es(t);
  double r = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r += std::log2(1.0 + es.eigenvalues()(i));
  return r;
}

inline double oracle_centralized(const ComplexMatrix& h, double rho) {
  const EMat g = to_eigen(h);
  return oracle_rate(g, EMat::Identity(g.rows(), g.rows()), rho);
}

/// Small grid that keeps per-case runtime low: 0.6 m x 1.2 m at λ = 0.1.
inline ScenarioConfig small_config(double panel_side, std::size_t K, std::size_t np, std::uint64_t seed) {
  ScenarioConfig c;
  c.wavelength = 0.1;
  c.surface_height = 0.6;
  c.surface_width = 1.2;
  c.panel_side = panel_side;
  c.K = K;
  c.Np = np;
  c.rng_seed = seed;
  c.service_area.depth = 4.0;
  c.service_area.width = 3.0;
  return c;
}

struct Drop {
  SurfaceLayout surface;
  ChannelMatrix channel;
  std::vector<ComplexMatrix> slices;
};

inline Drop make_drop(const ScenarioConfig& c) {
  Drop d;
  d.surface = build_surface(c);
  d.channel = channel_matrix(d.surface, place_users(c), c.lambda());
  d.slices = panel_channels(d.channel, d.surface);
  return d;
}

inline std::vector<PanelEqualizer> rmf_all(const std::vector<ComplexMatrix>& slices, std::size_t np) {
  std::vector<PanelEqualizer> eqs;
  for (std::size_t i = 0; i < slices.size(); ++i) eqs.push_back(rmf_formulate(slices[i], np, i));
  return eqs;
}

inline std::vector<std::size_t> iota_order(std::size_t n) {
  std::vector<std::size_t> o(n);
  for (std::size_t i = 0; i < n; ++i) o[i] = i;
  return o;
}

}  // namespace lis::test
