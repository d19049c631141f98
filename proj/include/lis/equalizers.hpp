#pragma once

// Per-panel filter formulation: reduced matched filter (RMF), iterative
// interference cancellation (IIC) with its sequential Z chain, and
// centralized MF/MMSE baselines.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "lis/config.hpp"
#include "lis/errors.hpp"
#include "lis/hermitian.hpp"
#include "lis/matrix.hpp"
#include "lis/svd.hpp"

namespace lis {

/// W is Np x Mp. For RMF, selected_users[r] is the user whose conjugated
/// channel forms row r; for IIC it is the placeholder 0..K-1.
struct PanelEqualizer {
  ComplexMatrix W;
  std::vector<std::size_t> selected_users;
  std::size_t panel_index = 0;
  Algorithm algorithm = Algorithm::rmf;
};

/// K x K Hermitian matrix passed along the IIC chain; it plays the role of
/// the interference-plus-noise covariance seen by the next panel.
struct IICState {
  ComplexMatrix Z;

  static IICState identity(std::size_t K) { return {ComplexMatrix::identity(K)}; }
};

/// Column norms ||h_n||^2 of a panel channel.
inline std::vector<double> user_strengths(const ComplexMatrix& h) {
  std::vector<double> s(h.cols());
  for (std::size_t n = 0; n < h.cols(); ++n) s[n] = kernel::norm2(h.col(n));
  return s;
}

/// Keeps the Np users with the largest local ||h_n||^2 (descending, ties to
/// the lower index) and stacks their conjugated channels as rows.
inline PanelEqualizer rmf_formulate(const ComplexMatrix& h, std::size_t np, std::size_t panel_index = 0) {
  const std::size_t K = h.cols();
  if (np < 1 || np > K)
    throw ConfigError("rmf_formulate: Np = " + std::to_string(np) + " outside [1, K = " + std::to_string(K) + "]");
  require_finite(h, "rmf_formulate");
  const std::vector<double> s = user_strengths(h);
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  PanelEqualizer eq{ComplexMatrix(np, h.rows()), {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(np)},
                    panel_index, Algorithm::rmf};
  for (std::size_t r = 0; r < np; ++r) {
    const auto hk = h.col(eq.selected_users[r]);
    for (std::size_t m = 0; m < h.rows(); ++m) eq.W(r, m) = std::conj(hk[m]);
  }
  return eq;
}

struct IicStepResult {
  PanelEqualizer equalizer;
  IICState state;
};

/// One panel of the IIC chain:
///   1. [U_z, S_z] = svd(Z_prev)
///   2. H_eq = H_i U_z S_z^{-1/2}
///   3. U_eq = left singular vectors of H_eq
///   4. W = (first Np columns of U_eq)^H
///   5. Z = Z_prev + H_i^H W^H W H_i
inline IicStepResult iic_formulate_step(const ComplexMatrix& h, const IICState& prev, std::size_t np,
                                        std::size_t panel_index = 0, double floor_ratio = 1e-12) {
  const std::size_t Mp = h.rows(), K = h.cols();
  if (prev.Z.rows() != K || prev.Z.cols() != K)
    throw DimensionError("iic_formulate_step: Z is " + std::to_string(prev.Z.rows()) + "x" +
                         std::to_string(prev.Z.cols()) + " but the panel channel has K = " + std::to_string(K));
  if (np < 1 || np > std::min(Mp, K))
    throw ConfigError("iic_formulate_step: Np = " + std::to_string(np) + " outside [1, min(Mp, K) = " +
                      std::to_string(std::min(Mp, K)) + "]");
  require_finite(h, "iic_formulate_step");
  require_finite(prev.Z, "iic_formulate_step");
  if (!is_hermitian(prev.Z, 1e-9)) throw NumericalError("iic_formulate_step: Z is not Hermitian");

  const SvdResult z_svd = svd_left(prev.Z);
  const std::vector<double> whitening = inv_sqrt_singular(z_svd.S, floor_ratio);
  ComplexMatrix h_eq = multiply(h, z_svd.U);
  for (std::size_t k = 0; k < K; ++k) kernel::scale(whitening[k], h_eq.col(k));

  const SvdResult eq_svd = svd_left(h_eq);
  ComplexMatrix w_adj(Mp, np);
  for (std::size_t r = 0; r < np; ++r)
    std::copy(eq_svd.U.col(r).begin(), eq_svd.U.col(r).end(), w_adj.col(r).begin());

  const ComplexMatrix projected = adjoint_multiply(w_adj, h);  // W H_i, Np x K
  IicStepResult out;
  out.equalizer.W = w_adj.adjoint();
  out.equalizer.selected_users.resize(K);
  std::iota(out.equalizer.selected_users.begin(), out.equalizer.selected_users.end(), std::size_t{0});
  out.equalizer.panel_index = panel_index;
  out.equalizer.algorithm = Algorithm::iic;
  out.state.Z = prev.Z + gram(projected);
  return out;
}

struct IicChainOptions {
  std::size_t sweeps = 1;
  bool record_history = false;
  double floor_ratio = 1e-12;
};

struct IicChainResult {
  std::vector<PanelEqualizer> equalizers;  // indexed by panel
  IICState final_state;
  std::vector<ComplexMatrix> z_history;  // Z before the first step, then after each step
};

/// Threads Z through the panels in `order`. Extra sweeps revisit each panel
/// with its own previous contribution removed from Z.
inline IicChainResult iic_chain(const std::vector<ComplexMatrix>& slices, std::size_t np, const IICState& z0,
                                const std::vector<std::size_t>& order, const IicChainOptions& options = {}) {
  const std::size_t P = slices.size();
  if (order.size() != P) throw DimensionError("iic_chain: order length does not match panel count");
  std::vector<bool> seen(P, false);
  for (std::size_t i : order) {
    if (i >= P || seen[i]) throw ConfigError("iic_chain: order is not a permutation of panel indices");
    seen[i] = true;
  }
  if (options.sweeps < 1) throw ConfigError("iic_chain: sweeps must be at least 1");

  IicChainResult result;
  result.equalizers.resize(P);
  std::vector<ComplexMatrix> contribution(P);
  IICState z = z0;
  if (options.record_history) result.z_history.push_back(z.Z);
  for (std::size_t sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t i : order) {
      IICState input = z;
      if (sweep > 0) input.Z -= contribution[i];
      IicStepResult step = iic_formulate_step(slices[i], input, np, i, options.floor_ratio);
      contribution[i] = step.state.Z - input.Z;
      result.equalizers[i] = std::move(step.equalizer);
      z = std::move(step.state);
      if (options.record_history) result.z_history.push_back(z.Z);
    }
  }
  result.final_state = std::move(z);
  return result;
}

enum class Baseline { mf, mmse };

/// Centralized K x M filter: MF gives H^H, MMSE gives (H^H H + I/ρ)^{-1} H^H.
inline ComplexMatrix baseline_centralized(const ComplexMatrix& h, Baseline kind, double rho) {
  require_finite(h, "baseline_centralized");
  if (kind == Baseline::mf) return h.adjoint();
  if (!(rho > 0.0)) throw ConfigError("baseline_centralized: rho must be positive");
  ComplexMatrix a = gram(h);
  for (std::size_t k = 0; k < a.rows(); ++k) a(k, k) += 1.0 / rho;
  return hermitian_solve(a, h.adjoint());
}

}  // namespace lis
