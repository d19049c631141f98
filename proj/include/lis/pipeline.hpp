#pragma once

// Filtering phase: panel filters, PSU-tree aggregation (combine / bypass),
// the effective channel seen by the CDSP, sum-rate and a Monte-Carlo
// detector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lis/config.hpp"
#include "lis/equalizers.hpp"
#include "lis/errors.hpp"
#include "lis/hermitian.hpp"
#include "lis/matrix.hpp"
#include "lis/random.hpp"
#include "lis/svd.hpp"

namespace lis {

/// Stream leaving a panel or a PSU. Tagged streams carry one user index per
/// value; untagged streams (IIC outputs) can only be bypassed.
struct FilteredBlock {
  std::vector<cplx> values;
  std::vector<std::size_t> user_tags;

  bool tagged() const noexcept { return !user_tags.empty(); }
};

inline FilteredBlock panel_filter(const PanelEqualizer& eq, std::span<const cplx> y) {
  if (y.size() != eq.W.cols())
    throw DimensionError("panel_filter: received vector has " + std::to_string(y.size()) + " entries, filter expects " +
                         std::to_string(eq.W.cols()));
  FilteredBlock out;
  out.values = multiply(eq.W, y);
  if (eq.algorithm == Algorithm::rmf) out.user_tags = eq.selected_users;
  return out;
}

/// Combine: per-user coherent sum into a length-K vector (absent users get 0).
/// Bypass: concatenation in child order.
inline FilteredBlock psu_process(const std::vector<FilteredBlock>& children, AggregationMode mode, std::size_t K) {
  FilteredBlock out;
  if (mode == AggregationMode::bypass) {
    const bool all_tagged = std::all_of(children.begin(), children.end(), [](const auto& c) { return c.tagged(); });
    for (const auto& c : children) {
      out.values.insert(out.values.end(), c.values.begin(), c.values.end());
      if (all_tagged) out.user_tags.insert(out.user_tags.end(), c.user_tags.begin(), c.user_tags.end());
    }
    return out;
  }
  out.values.assign(K, cplx{});
  out.user_tags.resize(K);
  for (std::size_t k = 0; k < K; ++k) out.user_tags[k] = k;
  std::vector<char> seen(K);
  for (std::size_t ci = 0; ci < children.size(); ++ci) {
    const auto& c = children[ci];
    if (c.user_tags.size() != c.values.size())
      throw ConfigError("psu_process: combine needs one user tag per value (child " + std::to_string(ci) + ")");
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t r = 0; r < c.values.size(); ++r) {
      const std::size_t k = c.user_tags[r];
      if (k >= K) throw DimensionError("psu_process: user tag " + std::to_string(k) + " out of range");
      if (seen[k]) throw ConfigError("psu_process: duplicate user tag " + std::to_string(k) + " in child " +
                                     std::to_string(ci));
      seen[k] = 1;
      out.values[k] += c.values[r];
    }
  }
  return out;
}

inline std::size_t tree_levels(std::size_t P, std::size_t fan_in = 4) {
  if (fan_in < 2) throw ConfigError("tree_levels: fan_in must be at least 2");
  std::size_t levels = 0;
  for (std::size_t n = P; n > 1; n = (n + fan_in - 1) / fan_in) ++levels;
  return levels;
}

/// nodes[l][j] lists the inputs of PSU j at level l; level 0 consumes panel
/// outputs, level l consumes level l-1 outputs. Siblings are consecutive.
struct PsuTree {
  std::size_t fan_in = 4;
  std::size_t levels = 0;
  AggregationMode mode = AggregationMode::combine;
  std::size_t panels = 0;
  std::vector<std::vector<std::vector<std::size_t>>> nodes;
};

inline PsuTree build_psu_tree(std::size_t P, AggregationMode mode, std::size_t fan_in = 4) {
  if (P < 1) throw ConfigError("build_psu_tree: need at least one panel");
  PsuTree t;
  t.fan_in = fan_in;
  t.mode = mode;
  t.panels = P;
  t.levels = tree_levels(P, fan_in);
  std::size_t inputs = P;
  for (std::size_t l = 0; l < t.levels; ++l) {
    std::vector<std::vector<std::size_t>> level;
    for (std::size_t first = 0; first < inputs; first += fan_in) {
      std::vector<std::size_t> children;
      for (std::size_t i = first; i < std::min(inputs, first + fan_in); ++i) children.push_back(i);
      level.push_back(std::move(children));
    }
    inputs = level.size();
    t.nodes.push_back(std::move(level));
  }
  return t;
}

/// Root output of the tree. With a single panel there is no PSU and the
/// panel stream reaches the CDSP unchanged.
inline FilteredBlock aggregate_tree(const PsuTree& tree, const std::vector<FilteredBlock>& blocks, std::size_t K) {
  if (blocks.size() != tree.panels)
    throw DimensionError("aggregate_tree: " + std::to_string(blocks.size()) + " blocks for " +
                         std::to_string(tree.panels) + " panels");
  std::vector<FilteredBlock> current = blocks;
  for (const auto& level : tree.nodes) {
    std::vector<FilteredBlock> next;
    next.reserve(level.size());
    for (const auto& node : level) {
      std::vector<FilteredBlock> children;
      children.reserve(node.size());
      for (std::size_t i : node) children.push_back(std::move(current[i]));
      next.push_back(psu_process(children, tree.mode, K));
    }
    current = std::move(next);
  }
  return std::move(current.front());
}

/// Reduced observation z = G x + ñ with cov(ñ) = C. C is block diagonal;
/// combine mode has one K x K block, bypass mode one block per panel.
struct EffectiveChannel {
  ComplexMatrix G;
  std::vector<ComplexMatrix> C_blocks;
  AggregationMode mode = AggregationMode::combine;

  std::size_t dim() const noexcept { return G.rows(); }

  ComplexMatrix dense_C() const {
    ComplexMatrix c(dim(), dim());
    std::size_t off = 0;
    for (const auto& b : C_blocks) {
      for (std::size_t j = 0; j < b.cols(); ++j)
        for (std::size_t i = 0; i < b.rows(); ++i) c(off + i, off + j) = b(i, j);
      off += b.rows();
    }
    return c;
  }
};

/// Combine: G = Σ S_i W_i H_i, C = Σ S_i W_i W_i^H S_i^T with S_i the user
/// embedding of panel i. Bypass: G stacks W_i H_i, C = blockdiag(W_i W_i^H).
inline EffectiveChannel effective_channel(const std::vector<PanelEqualizer>& equalizers,
                                          const std::vector<ComplexMatrix>& slices, AggregationMode mode) {
  if (equalizers.empty() || equalizers.size() != slices.size())
    throw DimensionError("effective_channel: need one equalizer per panel slice");
  const std::size_t K = slices.front().cols();
  std::size_t rows = 0;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (slices[i].cols() != K) throw DimensionError("effective_channel: slices disagree on K");
    if (equalizers[i].W.cols() != slices[i].rows())
      throw DimensionError("effective_channel: panel " + std::to_string(i) + " filter width " +
                           std::to_string(equalizers[i].W.cols()) + " does not match Mp = " +
                           std::to_string(slices[i].rows()));
    rows += equalizers[i].W.rows();
  }

  EffectiveChannel eff;
  eff.mode = mode;
  if (mode == AggregationMode::combine) {
    eff.G = ComplexMatrix(K, K);
    ComplexMatrix c(K, K);
    for (std::size_t i = 0; i < slices.size(); ++i) {
      const auto& eq = equalizers[i];
      if (eq.algorithm != Algorithm::rmf || eq.selected_users.size() != eq.W.rows())
        throw ConfigError("effective_channel: combine mode needs user-tagged (RMF) panel outputs");
      const ComplexMatrix b = multiply(eq.W, slices[i]);
      const ComplexMatrix ww = multiply_adjoint(eq.W, eq.W);
      const auto& tags = eq.selected_users;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t r = 0; r < tags.size(); ++r) eff.G(tags[r], k) += b(r, k);
      for (std::size_t s = 0; s < tags.size(); ++s)
        for (std::size_t r = 0; r < tags.size(); ++r) c(tags[r], tags[s]) += ww(r, s);
    }
    eff.C_blocks.push_back(std::move(c));
    return eff;
  }

  eff.G = ComplexMatrix(rows, K);
  std::size_t off = 0;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& w = equalizers[i].W;
    const ComplexMatrix b = multiply(w, slices[i]);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < b.rows(); ++r) eff.G(off + r, k) = b(r, k);
    eff.C_blocks.push_back(multiply_adjoint(w, w));
    off += b.rows();
  }
  return eff;
}

namespace detail {

/// Cholesky factors of the C blocks after the conditioning guard: when the
/// smallest eigenvalue is below 1e-12 of the largest, every block gets
/// 1e-12 * trace(C) / dim added to its diagonal.
inline std::vector<ComplexMatrix> regularized_cholesky(const EffectiveChannel& eff) {
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0, trace = 0.0;
  for (const auto& b : eff.C_blocks) {
    if (!is_hermitian(b, 1e-9)) throw NumericalError("effective channel: noise covariance is not Hermitian");
    const SvdResult s = svd_left(b);
    lmin = std::min(lmin, s.S.back());
    lmax = std::max(lmax, s.S.front());
    for (std::size_t i = 0; i < b.rows(); ++i) trace += b(i, i).real();
  }
  if (!(lmax > 0.0)) throw NumericalError("effective channel: noise covariance is zero");
  std::vector<ComplexMatrix> factors;
  factors.reserve(eff.C_blocks.size());
  const double delta = lmin < 1e-12 * lmax ? 1e-12 * trace / static_cast<double>(eff.dim()) : 0.0;
  for (const auto& b : eff.C_blocks) {
    ComplexMatrix c = b;
    for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += delta;
    factors.push_back(cholesky(c));
  }
  return factors;
}

/// L^{-1} G block by block (the noise-whitened effective channel).
inline ComplexMatrix whiten(const EffectiveChannel& eff, const std::vector<ComplexMatrix>& factors) {
  const std::size_t K = eff.G.cols();
  ComplexMatrix out(eff.dim(), K);
  std::size_t off = 0;
  for (const auto& l : factors) {
    const std::size_t n = l.rows();
    ComplexMatrix block(n, K);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < n; ++r) block(r, k) = eff.G(off + r, k);
    forward_substitute(l, block);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < n; ++r) out(off + r, k) = block(r, k);
    off += n;
  }
  return out;
}

}  // namespace detail

/// log2 det(I + ρ G^H C^{-1} G) in bps/Hz.
inline double sum_rate(const EffectiveChannel& eff, double rho) {
  if (!(rho > 0.0)) throw ConfigError("sum_rate: rho must be positive");
  const auto factors = detail::regularized_cholesky(eff);
  ComplexMatrix t = gram(detail::whiten(eff, factors));
  t *= rho;
  for (std::size_t k = 0; k < t.rows(); ++k) t(k, k) += 1.0;
  return logdet_hermitian_pd(t);
}

/// log2 det(I + ρ H^H H): the rate of unprocessed full-array observation.
inline double centralized_rate(const ComplexMatrix& h, double rho) {
  ComplexMatrix t = gram(h);
  t *= rho;
  for (std::size_t k = 0; k < t.rows(); ++k) t(k, k) += 1.0;
  return logdet_hermitian_pd(t);
}

enum class Constellation { qpsk };

/// Monte-Carlo symbol-error rate of linear MMSE detection on the reduced
/// observation z = sqrt(ρ) G x + ñ, ñ ~ CN(0, C), with
/// x̂ = (G^H C^{-1} G + I/ρ)^{-1} G^H C^{-1} z and nearest-symbol decisions.
inline double detect_and_ser(const EffectiveChannel& eff, double rho, std::size_t n_symbols, std::uint64_t seed,
                             Constellation constellation = Constellation::qpsk) {
  if (constellation != Constellation::qpsk) throw ConfigError("detect_and_ser: unsupported constellation");
  if (!(rho > 0.0)) throw ConfigError("detect_and_ser: rho must be positive");
  if (n_symbols == 0) throw ConfigError("detect_and_ser: need at least one symbol");
  const std::size_t K = eff.G.cols(), dim = eff.dim();
  const ComplexMatrix gw = detail::whiten(eff, detail::regularized_cholesky(eff));
  ComplexMatrix a = gram(gw);
  for (std::size_t k = 0; k < K; ++k) a(k, k) += 1.0 / rho;
  const ComplexMatrix f = hermitian_solve(a, gw.adjoint());  // K x dim

  Rng rng(seed);
  const double amp = std::sqrt(rho);
  const double s = std::sqrt(0.5);
  std::vector<cplx> x(K), z(dim);
  std::size_t errors = 0;
  for (std::size_t n = 0; n < n_symbols; ++n) {
    for (auto& v : x) {
      const double re = rng.uniform() < 0.5 ? -s : s;
      const double im = rng.uniform() < 0.5 ? -s : s;
      v = {re, im};
    }
    for (auto& v : z) v = rng.complex_normal();
    for (std::size_t k = 0; k < K; ++k) kernel::axpy(amp * x[k], gw.col(k), z);
    const std::vector<cplx> xhat = multiply(f, z);
    for (std::size_t k = 0; k < K; ++k) {
      const bool ok = (xhat[k].real() >= 0.0) == (x[k].real() > 0.0) && (xhat[k].imag() >= 0.0) == (x[k].imag() > 0.0);
      if (!ok) ++errors;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(n_symbols * K);
}

}  // namespace lis
