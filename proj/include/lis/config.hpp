#pragma once

// Scenario configuration: physical parameters, processing options and timing
// constants, with strict JSON (de)serialization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lis/errors.hpp"

namespace lis {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class Algorithm { rmf, iic };
enum class AggregationMode { combine, bypass };
enum class PanelOrder { raster, snake };

inline std::string to_string(Algorithm a) { return a == Algorithm::rmf ? "rmf" : "iic"; }
inline std::string to_string(AggregationMode m) { return m == AggregationMode::combine ? "combine" : "bypass"; }
inline std::string to_string(PanelOrder o) { return o == PanelOrder::raster ? "raster" : "snake"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "rmf" || s == "RMF") return Algorithm::rmf;
  if (s == "iic" || s == "IIC") return Algorithm::iic;
  throw ConfigError("unknown algorithm '" + std::string(s) + "' (expected rmf or iic)");
}

inline AggregationMode parse_aggregation(std::string_view s) {
  if (s == "combine") return AggregationMode::combine;
  if (s == "bypass") return AggregationMode::bypass;
  throw ConfigError("unknown aggregation mode '" + std::string(s) + "' (expected combine or bypass)");
}

inline PanelOrder parse_panel_order(std::string_view s) {
  if (s == "raster") return PanelOrder::raster;
  if (s == "snake") return PanelOrder::snake;
  throw ConfigError("unknown panel order '" + std::string(s) + "' (expected raster or snake)");
}

/// RMF aggregates by per-user combining, IIC bypasses streams to the CDSP.
inline AggregationMode default_aggregation(Algorithm a) {
  return a == Algorithm::rmf ? AggregationMode::combine : AggregationMode::bypass;
}

/// Axis-aligned user drop box. Depth runs along z (away from the surface),
/// width along x, height along y.
struct ServiceArea {
  double depth = 40.0;
  double width = 45.0;
  double height = 0.0;
  double z_min = 0.5;
  double center_x = 0.0;
  std::optional<double> center_y;  // defaults to mid-surface height
};

/// Hardware timing constants for the latency model.
struct TimingParams {
  double T_Filter = 1e-6;
  double T_PSU = 1e-7;
  double T_compute_IIC = 2e-6;
  double T_panel_panel = 1e-6;
  double f_clk = 5e8;
  std::size_t parallel_macs = 10;
};

/// Defaults reproduce the 50-user, 2.25 m x 22.5 m, 4 GHz, 0 dB scenario.
struct ScenarioConfig {
  std::optional<double> wavelength = 0.075;
  std::optional<double> carrier_frequency;
  double surface_height = 2.25;
  double surface_width = 22.5;
  double panel_side = 2.25;
  std::size_t K = 50;
  double snr = 1.0;
  double f_B = 100e6;
  std::size_t w_filt = 8;
  std::size_t N_cs = 12;
  double subcarrier_spacing = 15e3;
  double coherence_time = 1e-3;
  ServiceArea service_area;
  std::uint64_t rng_seed = 1;
  std::size_t Np = 16;

  PanelOrder panel_order = PanelOrder::raster;
  std::size_t fan_in = 4;
  std::size_t iic_sweeps = 1;
  std::optional<AggregationMode> aggregation;  // per-algorithm default when unset
  TimingParams timing;

  double lambda() const { return wavelength ? *wavelength : kSpeedOfLight / carrier_frequency.value_or(0.0); }
  double pitch() const { return lambda() / 2.0; }
  double user_height() const { return service_area.center_y.value_or(surface_height / 2.0); }
  AggregationMode aggregation_for(Algorithm a) const { return aggregation.value_or(default_aggregation(a)); }
};

namespace detail {

/// n if value == n * unit for a positive integer n (relative tolerance 1e-9).
inline std::optional<std::size_t> integer_multiple(double value, double unit) {
  if (!(unit > 0.0) || !(value > 0.0)) return std::nullopt;
  const double ratio = value / unit;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) return std::nullopt;
  return static_cast<std::size_t>(n);
}

}  // namespace detail

/// Panel sides (meters) that tile the configured surface on the λ/2 grid.
inline std::vector<double> valid_panel_sides(const ScenarioConfig& c) {
  const auto gx = detail::integer_multiple(c.surface_width, c.pitch());
  const auto gy = detail::integer_multiple(c.surface_height, c.pitch());
  std::vector<double> sides;
  if (!gx || !gy) return sides;
  for (std::size_t n = 1; n <= std::min(*gx, *gy); ++n)
    if (*gx % n == 0 && *gy % n == 0) sides.push_back(static_cast<double>(n) * c.pitch());
  return sides;
}

inline std::string format_sides(const std::vector<double>& sides) {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t i = 0; i < sides.size(); ++i) os << (i ? ", " : "") << sides[i];
  return os.str();
}

inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (c.wavelength.has_value() == c.carrier_frequency.has_value())
    fail("exactly one of 'wavelength' and 'carrier_frequency' must be given");
  if (!(c.lambda() > 0.0) || !std::isfinite(c.lambda())) fail("wavelength must be positive");
  if (!(c.f_B > 0.0)) fail("f_B must be positive");
  if (c.K < 1) fail("K must be at least 1");
  if (c.Np < 1) fail("Np must be at least 1");
  if (c.Np > c.K) fail("Np (" + std::to_string(c.Np) + ") must not exceed K (" + std::to_string(c.K) + ")");
  if (!(c.snr > 0.0)) fail("snr must be positive");
  if (c.w_filt < 1) fail("w_filt must be at least 1 bit");
  if (c.N_cs < 1) fail("N_cs must be at least 1");
  if (!(c.subcarrier_spacing > 0.0)) fail("subcarrier_spacing must be positive");
  if (!(c.coherence_time > 0.0)) fail("coherence_time must be positive");
  if (c.fan_in < 2) fail("fan_in must be at least 2");
  if (c.iic_sweeps < 1) fail("iic_sweeps must be at least 1");
  const auto& a = c.service_area;
  if (!(a.depth >= 0.0) || !(a.width >= 0.0) || !(a.height >= 0.0)) fail("service_area extents must be non-negative");
  if (!(a.z_min > 0.0)) fail("service_area.z_min must be positive (users in front of the surface)");
  const auto& t = c.timing;
  if (!(t.T_Filter > 0.0) || !(t.T_PSU > 0.0) || !(t.T_compute_IIC > 0.0) || !(t.T_panel_panel > 0.0) ||
      !(t.f_clk > 0.0) || t.parallel_macs < 1)
    fail("timing parameters must be positive");

  const auto gx = detail::integer_multiple(c.surface_width, c.pitch());
  const auto gy = detail::integer_multiple(c.surface_height, c.pitch());
  if (!gx || !gy)
    fail("surface dimensions " + std::to_string(c.surface_height) + " x " + std::to_string(c.surface_width) +
         " m are not integer multiples of the antenna pitch " + std::to_string(c.pitch()) + " m");
  const auto n = detail::integer_multiple(c.panel_side, c.pitch());
  if (!n || *gx % *n != 0 || *gy % *n != 0)
    fail("panel_side " + std::to_string(c.panel_side) + " m does not tile the surface; valid panel sides: " +
         format_sides(valid_panel_sides(c)));
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<T>();
  }
}

}  // namespace detail

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  using detail::read;
  ScenarioConfig c;
  try {
    detail::reject_unknown(j,
                           {"wavelength", "carrier_frequency", "surface_height", "surface_width", "panel_side", "K",
                            "snr", "f_B", "w_filt", "N_cs", "subcarrier_spacing", "coherence_time", "service_area",
                            "rng_seed", "Np", "panel_order", "fan_in", "iic_sweeps", "aggregation", "timing"},
                           "scenario config");
    if (j.contains("carrier_frequency") && !j.contains("wavelength")) c.wavelength.reset();
    read(j, "wavelength", c.wavelength);
    read(j, "carrier_frequency", c.carrier_frequency);
    read(j, "surface_height", c.surface_height);
    read(j, "surface_width", c.surface_width);
    read(j, "panel_side", c.panel_side);
    read(j, "K", c.K);
    read(j, "snr", c.snr);
    read(j, "f_B", c.f_B);
    read(j, "w_filt", c.w_filt);
    read(j, "N_cs", c.N_cs);
    read(j, "subcarrier_spacing", c.subcarrier_spacing);
    read(j, "coherence_time", c.coherence_time);
    read(j, "rng_seed", c.rng_seed);
    read(j, "Np", c.Np);
    read(j, "fan_in", c.fan_in);
    read(j, "iic_sweeps", c.iic_sweeps);
    if (j.contains("panel_order")) c.panel_order = parse_panel_order(j.at("panel_order").get<std::string>());
    if (j.contains("aggregation")) {
      const auto& a = j.at("aggregation");
      if (a.is_null() || a.get<std::string>() == "default") {
        c.aggregation.reset();
      } else {
        c.aggregation = parse_aggregation(a.get<std::string>());
      }
    }
    if (j.contains("service_area")) {
      const auto& s = j.at("service_area");
      detail::reject_unknown(s, {"depth", "width", "height", "z_min", "center_x", "center_y"}, "service_area");
      read(s, "depth", c.service_area.depth);
      read(s, "width", c.service_area.width);
      read(s, "height", c.service_area.height);
      read(s, "z_min", c.service_area.z_min);
      read(s, "center_x", c.service_area.center_x);
      read(s, "center_y", c.service_area.center_y);
    }
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      detail::reject_unknown(t, {"T_Filter", "T_PSU", "T_compute_IIC", "T_panel_panel", "f_clk", "parallel_macs"},
                             "timing");
      read(t, "T_Filter", c.timing.T_Filter);
      read(t, "T_PSU", c.timing.T_PSU);
      read(t, "T_compute_IIC", c.timing.T_compute_IIC);
      read(t, "T_panel_panel", c.timing.T_panel_panel);
      read(t, "f_clk", c.timing.f_clk);
      read(t, "parallel_macs", c.timing.parallel_macs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  if (c.wavelength) j["wavelength"] = *c.wavelength;
  if (c.carrier_frequency) j["carrier_frequency"] = *c.carrier_frequency;
  j["surface_height"] = c.surface_height;
  j["surface_width"] = c.surface_width;
  j["panel_side"] = c.panel_side;
  j["K"] = c.K;
  j["snr"] = c.snr;
  j["f_B"] = c.f_B;
  j["w_filt"] = c.w_filt;
  j["N_cs"] = c.N_cs;
  j["subcarrier_spacing"] = c.subcarrier_spacing;
  j["coherence_time"] = c.coherence_time;
  j["service_area"] = {{"depth", c.service_area.depth},       {"width", c.service_area.width},
                       {"height", c.service_area.height},     {"z_min", c.service_area.z_min},
                       {"center_x", c.service_area.center_x}, {"center_y", c.user_height()}};
  j["rng_seed"] = c.rng_seed;
  j["Np"] = c.Np;
  j["panel_order"] = to_string(c.panel_order);
  j["fan_in"] = c.fan_in;
  j["iic_sweeps"] = c.iic_sweeps;
  j["aggregation"] = c.aggregation ? to_string(*c.aggregation) : "default";
  j["timing"] = {{"T_Filter", c.timing.T_Filter},           {"T_PSU", c.timing.T_PSU},
                 {"T_compute_IIC", c.timing.T_compute_IIC}, {"T_panel_panel", c.timing.T_panel_panel},
                 {"f_clk", c.timing.f_clk},                 {"parallel_macs", c.timing.parallel_macs}};
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline ScenarioConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

}  // namespace lis
