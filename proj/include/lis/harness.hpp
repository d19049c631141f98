#pragma once

// Scenario runner, Monte-Carlo (Ap, Np) design-space sweeps, iso-rate
// design-point extraction and the sweep CSV format.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "lis/config.hpp"
#include "lis/costmodel.hpp"
#include "lis/equalizers.hpp"
#include "lis/errors.hpp"
#include "lis/geometry.hpp"
#include "lis/pipeline.hpp"

namespace lis {

namespace detail {

/// Runs fn, prefixing any library error with the stage name.
template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(stage) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(stage) + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(std::string(stage) + ": " + e.what());
  }
}

}  // namespace detail

/// Formulates every panel's filter with `algo`, aggregates, and returns the
/// sum-rate at the panel/tree interface.
inline double evaluate_rate(const ScenarioConfig& config, Algorithm algo, const SurfaceLayout& surface,
                            const std::vector<ComplexMatrix>& slices, std::size_t np) {
  std::vector<PanelEqualizer> equalizers;
  detail::with_stage("formulation", [&] {
    if (algo == Algorithm::rmf) {
      equalizers.reserve(slices.size());
      for (std::size_t i = 0; i < slices.size(); ++i) equalizers.push_back(rmf_formulate(slices[i], np, i));
    } else {
      IicChainOptions opts;
      opts.sweeps = config.iic_sweeps;
      equalizers = iic_chain(slices, np, IICState::identity(config.K), surface.panel_order, opts).equalizers;
    }
    return 0;
  });
  return detail::with_stage("sum-rate", [&] {
    return sum_rate(effective_channel(equalizers, slices, config.aggregation_for(algo)), config.snr);
  });
}

struct ScenarioResult {
  Algorithm algorithm = Algorithm::rmf;
  double sum_rate = 0.0;
  double centralized_rate = 0.0;
  CostReport cost;
  std::size_t M = 0;
  std::size_t P = 0;
  std::size_t Mp = 0;
  double Ap = 0.0;
};

inline ScenarioResult run_scenario(const ScenarioConfig& config, Algorithm algo) {
  detail::with_stage("config", [&] {
    validate(config);
    return 0;
  });
  ScenarioResult r;
  r.algorithm = algo;
  const SurfaceLayout surface = detail::with_stage("surface", [&] { return build_surface(config); });
  const UserSet users = detail::with_stage("users", [&] { return place_users(config); });
  const ChannelMatrix ch = detail::with_stage("channel", [&] { return channel_matrix(surface, users, config.lambda()); });
  const auto slices = panel_channels(ch, surface);
  r.sum_rate = evaluate_rate(config, algo, surface, slices, config.Np);
  r.centralized_rate = detail::with_stage("centralized bound", [&] { return centralized_rate(ch.H, config.snr); });
  r.cost = cost_report(algo, surface.Mp, config.Np, config.K, surface.P, surface.Ap, cost_params(config));
  r.M = surface.M;
  r.P = surface.P;
  r.Mp = surface.Mp;
  r.Ap = surface.Ap;
  return r;
}

inline nlohmann::json to_json(const ScenarioResult& r) {
  return {{"algorithm", to_string(r.algorithm)},
          {"sum_rate_bps_per_hz", r.sum_rate},
          {"centralized_rate_bps_per_hz", r.centralized_rate},
          {"M", r.M},
          {"P", r.P},
          {"Mp", r.Mp},
          {"Ap_m2", r.Ap},
          {"cost", to_json(r.cost)}};
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
  ScenarioConfig base;
  std::vector<double> panel_sides{0.375, 0.5625, 1.125, 2.25};
  std::vector<std::size_t> np_values{1, 2, 4, 8, 12, 16, 24, 32, 50};
  std::vector<Algorithm> algorithms{Algorithm::rmf, Algorithm::iic};
  std::size_t n_drops = 10;
  std::vector<std::uint64_t> seeds;  // explicit drop seeds (first n_drops used); base.rng_seed + d when empty

  std::vector<std::uint64_t> drop_seeds() const {
    if (!seeds.empty())
      return {seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(std::min(n_drops, seeds.size()))};
    std::vector<std::uint64_t> s(n_drops);
    for (std::size_t d = 0; d < n_drops; ++d) s[d] = base.rng_seed + d;
    return s;
  }
};

inline void validate(const SweepSpec& spec) {
  validate(spec.base);
  if (spec.panel_sides.empty() || spec.np_values.empty() || spec.algorithms.empty())
    throw ConfigError("sweep spec: panel_sides, np_values and algorithms must be non-empty");
  if (spec.seeds.empty() && spec.n_drops < 1) throw ConfigError("sweep spec: n_drops must be at least 1");
  if (!spec.seeds.empty() && spec.n_drops > spec.seeds.size())
    throw ConfigError("sweep spec: n_drops exceeds the number of listed seeds");
  for (double side : spec.panel_sides) {
    ScenarioConfig c = spec.base;
    c.panel_side = side;
    validate(c);
  }
  for (std::size_t np : spec.np_values) {
    if (np < 1 || np > spec.base.K)
      throw ConfigError("sweep spec: Np = " + std::to_string(np) + " outside [1, K = " + std::to_string(spec.base.K) +
                        "]");
  }
}

inline SweepSpec sweep_spec_from_json(const nlohmann::json& j, const ScenarioConfig& base) {
  SweepSpec s;
  s.base = base;
  try {
    detail::reject_unknown(j, {"panel_sides", "np_values", "algorithms", "n_drops", "seeds"}, "sweep spec");
    if (j.contains("panel_sides")) s.panel_sides = j.at("panel_sides").get<std::vector<double>>();
    if (j.contains("np_values")) s.np_values = j.at("np_values").get<std::vector<std::size_t>>();
    if (j.contains("algorithms")) {
      s.algorithms.clear();
      for (const auto& a : j.at("algorithms")) s.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("seeds")) {
      s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      s.n_drops = s.seeds.size();
    }
    if (j.contains("n_drops")) s.n_drops = j.at("n_drops").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
  validate(s);
  return s;
}

inline nlohmann::json to_json(const SweepSpec& s) {
  nlohmann::json algos = nlohmann::json::array();
  for (auto a : s.algorithms) algos.push_back(to_string(a));
  nlohmann::json j = {{"panel_sides", s.panel_sides}, {"np_values", s.np_values}, {"algorithms", algos},
                      {"n_drops", s.n_drops}};
  if (!s.seeds.empty()) j["seeds"] = s.seeds;
  return j;
}

struct SweepRow {
  Algorithm algorithm = Algorithm::rmf;
  double Ap = 0.0;
  std::size_t Mp = 0;
  std::size_t Np = 0;
  std::size_t P = 0;
  double mean_rate = 0.0;
  double std_rate = 0.0;
  double C_filt = 0.0;
  double C_form = 0.0;
  double R_global = 0.0;
  double R_local = 0.0;
  double L_filtering = 0.0;
  double L_form = 0.0;

  bool operator==(const SweepRow&) const = default;
};

struct SweepFailure {
  Algorithm algorithm = Algorithm::rmf;
  double Ap = 0.0;
  std::size_t Np = 0;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepFailure> failures;
};

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Every (algorithm, panel side, Np) cell averaged over the drops. One job
/// per (panel side, drop) builds the channel once and evaluates all cells of
/// that drop; results are merged in a fixed order, so the output does not
/// depend on the worker count.
inline SweepResult run_sweep(const SweepSpec& spec, std::size_t workers = 1, const SweepProgress& progress = {}) {
  validate(spec);
  const auto seeds = spec.drop_seeds();
  const std::size_t n_sides = spec.panel_sides.size(), n_drops = seeds.size();
  const std::size_t n_algos = spec.algorithms.size(), n_np = spec.np_values.size();

  struct Cell {
    std::optional<double> rate;
    std::string error;
  };
  // cells[((side * n_drops + drop) * n_algos + algo) * n_np + np]
  std::vector<Cell> cells(n_sides * n_drops * n_algos * n_np);
  std::vector<SurfaceLayout> layouts(n_sides);

  const std::size_t jobs = n_sides * n_drops;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto run_job = [&](std::size_t job) {
    const std::size_t side = job / n_drops, drop = job % n_drops;
    ScenarioConfig c = spec.base;
    c.panel_side = spec.panel_sides[side];
    c.rng_seed = seeds[drop];
    auto cell = [&](std::size_t a, std::size_t n) -> Cell& {
      return cells[((side * n_drops + drop) * n_algos + a) * n_np + n];
    };
    try {
      SurfaceLayout surface = build_surface(c);
      const ChannelMatrix ch = channel_matrix(surface, place_users(c), c.lambda());
      const auto slices = panel_channels(ch, surface);
      for (std::size_t a = 0; a < n_algos; ++a) {
        for (std::size_t n = 0; n < n_np; ++n) {
          try {
            cell(a, n).rate = evaluate_rate(c, spec.algorithms[a], surface, slices, spec.np_values[n]);
          } catch (const Error& e) {
            cell(a, n).error = e.what();
          }
        }
      }
      if (drop == 0) layouts[side] = std::move(surface);
    } catch (const Error& e) {
      for (std::size_t a = 0; a < n_algos; ++a)
        for (std::size_t n = 0; n < n_np; ++n) cell(a, n).error = e.what();
    }
    const std::size_t d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(d, jobs);
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, jobs));
  if (n_threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
      });
    }
    for (auto& th : pool) th.join();
  }

  const CostParams params = cost_params(spec.base);
  SweepResult result;
  for (std::size_t a = 0; a < n_algos; ++a) {
    for (std::size_t side = 0; side < n_sides; ++side) {
      const double Ap = spec.panel_sides[side] * spec.panel_sides[side];
      for (std::size_t n = 0; n < n_np; ++n) {
        std::vector<double> rates;
        std::string error;
        for (std::size_t drop = 0; drop < n_drops; ++drop) {
          const Cell& cl = cells[((side * n_drops + drop) * n_algos + a) * n_np + n];
          if (cl.rate) {
            rates.push_back(*cl.rate);
          } else if (error.empty()) {
            error = "seed " + std::to_string(seeds[drop]) + ": " + cl.error;
          }
        }
        if (!error.empty()) {
          result.failures.push_back({spec.algorithms[a], Ap, spec.np_values[n], error});
          continue;
        }
        const SurfaceLayout& s = layouts[side];
        SweepRow row;
        row.algorithm = spec.algorithms[a];
        row.Ap = Ap;
        row.Mp = s.Mp;
        row.Np = spec.np_values[n];
        row.P = s.P;
        double sum = 0.0;
        for (double r : rates) sum += r;
        row.mean_rate = sum / static_cast<double>(rates.size());
        double ss = 0.0;
        for (double r : rates) ss += (r - row.mean_rate) * (r - row.mean_rate);
        row.std_rate = rates.size() > 1 ? std::sqrt(ss / static_cast<double>(rates.size() - 1)) : 0.0;
        const CostReport cost = cost_report(row.algorithm, row.Mp, row.Np, spec.base.K, row.P, Ap, params);
        row.C_filt = cost.C_filt;
        row.C_form = cost.C_form;
        row.R_global = cost.R_global;
        row.R_local = cost.R_local;
        row.L_filtering = cost.L_filtering;
        row.L_form = cost.L_form;
        result.rows.push_back(row);
      }
    }
  }
  auto key = [](const SweepRow& r) { return std::tuple(static_cast<int>(r.algorithm), r.Ap, r.Np); };
  std::stable_sort(result.rows.begin(), result.rows.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  return result;
}

// ---------------------------------------------------------------------------
// CSV

inline const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols = {"algorithm",
                                                "Ap_m2",
                                                "Mp",
                                                "Np",
                                                "P",
                                                "mean_sum_rate_bps_per_hz",
                                                "std_sum_rate_bps_per_hz",
                                                "c_filt_mac_per_s_per_m2",
                                                "c_form_mac_per_s_per_m2",
                                                "r_global_bps_per_m2",
                                                "r_local_bps_per_m2",
                                                "l_filtering_s",
                                                "l_form_s"};
  return cols;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto& cols = sweep_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  char buf[40];
  auto num = [&](double v) -> const char* {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& r : rows) {
    os << to_string(r.algorithm) << ',' << num(r.Ap) << ',' << r.Mp << ',' << r.Np << ',' << r.P << ',';
    os << num(r.mean_rate) << ',';
    os << num(r.std_rate) << ',';
    os << num(r.C_filt) << ',';
    os << num(r.C_form) << ',';
    os << num(r.R_global) << ',';
    os << num(r.R_local) << ',';
    os << num(r.L_filtering) << ',';
    os << num(r.L_form) << '\n';
  }
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("sweep csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected;
  for (const auto& c : sweep_csv_columns()) expected += (expected.empty() ? "" : ",") + c;
  if (line != expected) throw ConfigError("sweep csv: unexpected header '" + line + "'");

  // from_chars keeps subnormals that stod rejects
  auto csv_double = [](const std::string& s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
  };
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    if (f.size() != sweep_csv_columns().size())
      throw ConfigError("sweep csv line " + std::to_string(lineno) + ": expected " +
                        std::to_string(sweep_csv_columns().size()) + " fields, got " + std::to_string(f.size()));
    try {
      SweepRow r;
      r.algorithm = parse_algorithm(f[0]);
      r.Ap = csv_double(f[1]);
      r.Mp = std::stoull(f[2]);
      r.Np = std::stoull(f[3]);
      r.P = std::stoull(f[4]);
      r.mean_rate = csv_double(f[5]);
      r.std_rate = csv_double(f[6]);
      r.C_filt = csv_double(f[7]);
      r.C_form = csv_double(f[8]);
      r.R_global = csv_double(f[9]);
      r.R_local = csv_double(f[10]);
      r.L_filtering = csv_double(f[11]);
      r.L_form = csv_double(f[12]);
      rows.push_back(r);
    } catch (const std::logic_error& e) {
      throw ConfigError("sweep csv line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Iso-rate design points

struct IsoRatePoint {
  Algorithm algorithm = Algorithm::rmf;
  double Ap = 0.0;
  std::size_t Np = 0;
  double mean_rate = 0.0;
  double C_filt = 0.0;
  double R_global = 0.0;
};

struct IsoRateResult {
  std::vector<IsoRatePoint> points;
  std::vector<std::string> notices;
};

/// For each (algorithm, Ap): the smallest Np whose mean rate reaches the
/// target. Panel sizes that never reach it are reported as notices.
inline IsoRateResult iso_rate_points(const std::vector<SweepRow>& rows, double target) {
  std::vector<SweepRow> sorted = rows;
  auto key = [](const SweepRow& r) { return std::tuple(static_cast<int>(r.algorithm), r.Ap, r.Np); };
  std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });

  IsoRateResult out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].algorithm == sorted[i].algorithm && sorted[j].Ap == sorted[i].Ap) ++j;
    const auto hit = std::find_if(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                                  sorted.begin() + static_cast<std::ptrdiff_t>(j),
                                  [&](const SweepRow& r) { return r.mean_rate >= target; });
    if (hit != sorted.begin() + static_cast<std::ptrdiff_t>(j)) {
      out.points.push_back({hit->algorithm, hit->Ap, hit->Np, hit->mean_rate, hit->C_filt, hit->R_global});
    } else {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: target %.6g bps/Hz unreachable at Ap = %.6g m^2 (best %.6g)",
                    to_string(sorted[i].algorithm).c_str(), target, sorted[i].Ap,
                    std::max_element(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                                     sorted.begin() + static_cast<std::ptrdiff_t>(j),
                                     [](const auto& x, const auto& y) { return x.mean_rate < y.mean_rate; })
                        ->mean_rate);
      out.notices.emplace_back(buf);
    }
    i = j;
  }
  return out;
}

}  // namespace lis
