#pragma once

// Closed-form implementation cost: computational complexity (MAC/s/m^2),
// interconnect bandwidth (bps/m^2) and processing latency (s).
//
// Conventions: one complex multiply-accumulate counts as one MAC; every
// complex value on a link costs 2 * w_filt bits; a filter is formulated for
// each group of N_cs coherent subcarriers once per coherence time.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lis/config.hpp"
#include "lis/pipeline.hpp"

namespace lis {

struct CostParams {
  double f_B = 100e6;
  std::size_t w_filt = 8;
  std::size_t N_cs = 12;
  double subcarrier_spacing = 15e3;
  double coherence_time = 1e-3;
  double T_Filter = 1e-6;
  double T_PSU = 1e-7;
  double T_compute_IIC = 2e-6;
  double T_panel_panel = 1e-6;
  double f_clk = 5e8;
  std::size_t parallel_macs = 10;
  std::size_t fan_in = 4;
};

inline CostParams cost_params(const ScenarioConfig& c) {
  return {c.f_B,
          c.w_filt,
          c.N_cs,
          c.subcarrier_spacing,
          c.coherence_time,
          c.timing.T_Filter,
          c.timing.T_PSU,
          c.timing.T_compute_IIC,
          c.timing.T_panel_panel,
          c.timing.f_clk,
          c.timing.parallel_macs,
          c.fan_in};
}

/// Filter formulations per second per panel: floor(floor(f_B/Δf) / N_cs)
/// coherent groups (at least one), each refreshed every coherence time.
inline double formulation_rate(const CostParams& p) {
  const auto subcarriers = static_cast<std::uint64_t>(std::floor(p.f_B / p.subcarrier_spacing * (1.0 + 1e-12)));
  const std::uint64_t groups = std::max<std::uint64_t>(1, subcarriers / p.N_cs);
  return static_cast<double>(groups) / p.coherence_time;
}

inline double complexity_filt(std::size_t Mp, std::size_t Np, double Ap, double f_B) {
  return static_cast<double>(Np * Mp) * f_B / Ap;
}

/// ||h||^2 for every user: Mp K MACs per formulation.
inline std::uint64_t ops_form_rmf(std::size_t Mp, std::size_t K) { return std::uint64_t{Mp} * K; }

inline double complexity_form_rmf(std::size_t Mp, std::size_t K, double Ap, double u_form) {
  return static_cast<double>(ops_form_rmf(Mp, K)) * u_form / Ap;
}

/// MAC counts of the five IIC formulation steps.
struct IicStepCounts {
  std::uint64_t svd_z = 0;          // step 1: 17 K^3
  std::uint64_t whiten = 0;         // step 2: (Mp + 1) K^2
  std::uint64_t svd_eq = 0;         // step 3: 4 Mp^2 K + 13 K^3
  std::uint64_t select_update = 0;  // steps 4-5: Mp K Np + Np K^2

  std::uint64_t total() const { return svd_z + whiten + svd_eq + select_update; }
};

inline IicStepCounts iic_step_counts(std::size_t Mp, std::size_t K, std::size_t Np) {
  const std::uint64_t m = Mp, k = K, n = Np;
  return {17 * k * k * k, (m + 1) * k * k, 4 * m * m * k + 13 * k * k * k, m * k * n + n * k * k};
}

/// 30 K^3 + b K^2 + c K with b = Mp + Np + 1, c = 4 Mp^2 + Mp Np.
inline std::uint64_t ops_form_iic(std::size_t Mp, std::size_t K, std::size_t Np) {
  const std::uint64_t m = Mp, k = K, n = Np;
  const std::uint64_t b = m + n + 1;
  const std::uint64_t c = 4 * m * m + m * n;
  return 30 * k * k * k + b * k * k + c * k;
}

inline double complexity_form_iic(std::size_t Mp, std::size_t K, std::size_t Np, double Ap, double u_form) {
  return static_cast<double>(ops_form_iic(Mp, K, Np)) * u_form / Ap;
}

inline double bandwidth_global(std::size_t Np, std::size_t w_filt, double f_B, double Ap) {
  return 2.0 * static_cast<double>(w_filt) * static_cast<double>(Np) * f_B / Ap;
}

/// One K x K complex Z per formulation crosses each panel-to-panel link.
inline double bandwidth_local(std::size_t K, std::size_t w_filt, double u_form, double Ap) {
  return 2.0 * static_cast<double>(w_filt) * static_cast<double>(K) * static_cast<double>(K) * u_form / Ap;
}

inline double latency_filtering(std::size_t P, double T_Filter, double T_PSU, std::size_t fan_in = 4) {
  return T_Filter + static_cast<double>(tree_levels(P, fan_in)) * T_PSU;
}

/// Worst case: the Z chain visits every panel in turn.
inline double latency_form_iic(std::size_t P, double T_compute_IIC, double T_panel_panel) {
  if (P == 0) return 0.0;
  return static_cast<double>(P) * T_compute_IIC + static_cast<double>(P - 1) * T_panel_panel;
}

inline double latency_form_rmf(std::uint64_t ops, std::size_t parallel_units, double f_clk) {
  return static_cast<double>(ops) / (static_cast<double>(parallel_units) * f_clk);
}

/// Raw ADC output of the whole surface with no panel processing.
inline double raw_backplane_rate(std::size_t M, std::size_t w_filt, double f_B) {
  return static_cast<double>(M) * 2.0 * static_cast<double>(w_filt) * f_B;
}

struct CostReport {
  Algorithm algorithm = Algorithm::rmf;
  double C_filt = 0.0;       // MAC/s/m^2
  double C_form = 0.0;       // MAC/s/m^2
  double R_global = 0.0;     // bps/m^2
  double R_local = 0.0;      // bps/m^2
  double L_filtering = 0.0;  // s
  double L_form = 0.0;       // s
  std::uint64_t ops_per_formulation = 0;
  double formulations_per_second = 0.0;
};

inline CostReport cost_report(Algorithm algo, std::size_t Mp, std::size_t Np, std::size_t K, std::size_t P, double Ap,
                              const CostParams& p) {
  CostReport r;
  r.algorithm = algo;
  r.formulations_per_second = formulation_rate(p);
  r.C_filt = complexity_filt(Mp, Np, Ap, p.f_B);
  r.R_global = bandwidth_global(Np, p.w_filt, p.f_B, Ap);
  r.L_filtering = latency_filtering(P, p.T_Filter, p.T_PSU, p.fan_in);
  if (algo == Algorithm::rmf) {
    r.ops_per_formulation = ops_form_rmf(Mp, K);
    r.C_form = complexity_form_rmf(Mp, K, Ap, r.formulations_per_second);
    r.R_local = 0.0;
    r.L_form = latency_form_rmf(r.ops_per_formulation, p.parallel_macs, p.f_clk);
  } else {
    r.ops_per_formulation = ops_form_iic(Mp, K, Np);
    r.C_form = complexity_form_iic(Mp, K, Np, Ap, r.formulations_per_second);
    r.R_local = bandwidth_local(K, p.w_filt, r.formulations_per_second, Ap);
    r.L_form = latency_form_iic(P, p.T_compute_IIC, p.T_panel_panel);
  }
  return r;
}

/// Cost report straight from a configuration; no channel is generated.
inline CostReport cost_report(const ScenarioConfig& c, Algorithm algo) {
  validate(c);
  const double pitch = c.pitch();
  const auto n = *detail::integer_multiple(c.panel_side, pitch);
  const auto gx = *detail::integer_multiple(c.surface_width, pitch);
  const auto gy = *detail::integer_multiple(c.surface_height, pitch);
  const std::size_t P = (gx / n) * (gy / n);
  return cost_report(algo, n * n, c.Np, c.K, P, c.panel_side * c.panel_side, cost_params(c));
}

inline const std::vector<std::string>& cost_report_columns() {
  static const std::vector<std::string> cols = {
      "algorithm",           "c_filt_mac_per_s_per_m2", "c_form_mac_per_s_per_m2", "r_global_bps_per_m2",
      "r_local_bps_per_m2",  "l_filtering_s",           "l_form_s",                "ops_per_formulation_mac",
      "formulations_per_s"};
  return cols;
}

inline nlohmann::json to_json(const CostReport& r) {
  return {{"algorithm", to_string(r.algorithm)},
          {"c_filt_mac_per_s_per_m2", r.C_filt},
          {"c_form_mac_per_s_per_m2", r.C_form},
          {"r_global_bps_per_m2", r.R_global},
          {"r_local_bps_per_m2", r.R_local},
          {"l_filtering_s", r.L_filtering},
          {"l_form_s", r.L_form},
          {"ops_per_formulation_mac", r.ops_per_formulation},
          {"formulations_per_s", r.formulations_per_second}};
}

inline void write_cost_csv(std::ostream& os, const std::vector<CostReport>& reports) {
  const auto& cols = cost_report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : reports) {
    os << to_string(r.algorithm) << ',' << num(r.C_filt) << ',' << num(r.C_form) << ',' << num(r.R_global) << ','
       << num(r.R_local) << ',' << num(r.L_filtering) << ',' << num(r.L_form) << ',' << r.ops_per_formulation << ','
       << num(r.formulations_per_second) << '\n';
  }
}

}  // namespace lis
