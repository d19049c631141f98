#pragma once

// Antenna grid, panel partition, user drops and the near-field LOS channel.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "lis/config.hpp"
#include "lis/errors.hpp"
#include "lis/matrix.hpp"
#include "lis/random.hpp"

namespace lis {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Antennas sit at cell centers of a λ/2 grid in the z = 0 plane; x spans the
/// surface width centered on 0, y runs from 0 to the surface height. Global
/// antenna index is row-major from the bottom row. Panels are square blocks
/// indexed the same way (bottom row of panels first, left to right).
struct SurfaceLayout {
  double lambda = 0.0;
  double pitch = 0.0;
  std::size_t grid_cols = 0;   // antennas along x
  std::size_t grid_rows = 0;   // antennas along y
  std::size_t panel_side_n = 0;  // antennas along one panel edge
  std::size_t panel_cols = 0;
  std::size_t panel_rows = 0;

  std::vector<Point2> antenna_positions;
  std::size_t M = 0;
  std::size_t P = 0;
  std::size_t Mp = 0;
  double Ap = 0.0;
  std::vector<std::size_t> panel_of_antenna;
  std::vector<std::vector<std::size_t>> panel_antennas;
  std::vector<std::size_t> panel_order;  // IIC chain sequence
};

struct UserSet {
  std::vector<Point3> positions;
  std::size_t size() const noexcept { return positions.size(); }
};

/// H = scale * raw_H with ||H||_F^2 = M K.
struct ChannelMatrix {
  ComplexMatrix H;
  ComplexMatrix raw_H;
  double scale = 1.0;
};

inline std::vector<std::size_t> make_panel_order(std::size_t panel_rows, std::size_t panel_cols, PanelOrder order) {
  std::vector<std::size_t> seq;
  seq.reserve(panel_rows * panel_cols);
  for (std::size_t r = 0; r < panel_rows; ++r) {
    for (std::size_t i = 0; i < panel_cols; ++i) {
      const bool reverse = order == PanelOrder::snake && (r % 2 == 1);
      seq.push_back(r * panel_cols + (reverse ? panel_cols - 1 - i : i));
    }
  }
  return seq;
}

inline SurfaceLayout build_surface(const ScenarioConfig& config) {
  validate(config);
  SurfaceLayout s;
  s.lambda = config.lambda();
  s.pitch = config.pitch();
  s.grid_cols = *detail::integer_multiple(config.surface_width, s.pitch);
  s.grid_rows = *detail::integer_multiple(config.surface_height, s.pitch);
  s.panel_side_n = *detail::integer_multiple(config.panel_side, s.pitch);
  s.panel_cols = s.grid_cols / s.panel_side_n;
  s.panel_rows = s.grid_rows / s.panel_side_n;
  s.M = s.grid_cols * s.grid_rows;
  s.P = s.panel_cols * s.panel_rows;
  s.Mp = s.panel_side_n * s.panel_side_n;
  s.Ap = config.panel_side * config.panel_side;

  s.antenna_positions.resize(s.M);
  s.panel_of_antenna.resize(s.M);
  s.panel_antennas.assign(s.P, {});
  for (auto& list : s.panel_antennas) list.reserve(s.Mp);
  const double x0 = -config.surface_width / 2.0;
  for (std::size_t r = 0; r < s.grid_rows; ++r) {
    for (std::size_t c = 0; c < s.grid_cols; ++c) {
      const std::size_t m = r * s.grid_cols + c;
      s.antenna_positions[m] = {x0 + (static_cast<double>(c) + 0.5) * s.pitch,
                                (static_cast<double>(r) + 0.5) * s.pitch};
      const std::size_t p = (r / s.panel_side_n) * s.panel_cols + c / s.panel_side_n;
      s.panel_of_antenna[m] = p;
      s.panel_antennas[p].push_back(m);
    }
  }
  s.panel_order = make_panel_order(s.panel_rows, s.panel_cols, config.panel_order);
  return s;
}

/// Antenna count of a height x width surface at λ/2 spacing, truncating
/// partial cells. Used for quick sizing of surfaces that do not tile exactly.
inline std::size_t estimate_antenna_count(double height, double width, double lambda) {
  if (!(lambda > 0.0) || height < 0.0 || width < 0.0) throw ConfigError("estimate_antenna_count: invalid arguments");
  const double pitch = lambda / 2.0;
  const auto rows = static_cast<std::size_t>(std::floor(height / pitch + 1e-9));
  const auto cols = static_cast<std::size_t>(std::floor(width / pitch + 1e-9));
  return rows * cols;
}

/// Users uniform over the service-area box; three draws per user (x, y, z) in
/// user-index order.
inline UserSet place_users(const ScenarioConfig& config) {
  validate(config);
  const auto& a = config.service_area;
  Rng rng(config.rng_seed);
  UserSet users;
  users.positions.reserve(config.K);
  const double x_lo = a.center_x - a.width / 2.0;
  const double y_lo = config.user_height() - a.height / 2.0;
  for (std::size_t k = 0; k < config.K; ++k) {
    const double x = x_lo + a.width * rng.uniform();
    const double y = y_lo + a.height * rng.uniform();
    const double z = a.z_min + a.depth * rng.uniform();
    users.positions.push_back({x, y, z});
  }
  return users;
}

/// Near-field line-of-sight gain between a user and an antenna at (x, y, 0):
/// sqrt(z) / (2 sqrt(pi) d^{3/2}) * exp(-2 pi j d / λ).
inline cplx los_gain(const Point3& user, const Point2& antenna, double lambda) {
  const double dx = user.x - antenna.x;
  const double dy = user.y - antenna.y;
  const double d = std::sqrt(user.z * user.z + dx * dx + dy * dy);
  const double amplitude = std::sqrt(user.z) / (2.0 * std::sqrt(std::numbers::pi) * d * std::sqrt(d));
  const double phase = -2.0 * std::numbers::pi * d / lambda;
  return {amplitude * std::cos(phase), amplitude * std::sin(phase)};
}

inline ChannelMatrix channel_matrix(const SurfaceLayout& surface, const UserSet& users, double lambda) {
  const std::size_t M = surface.antenna_positions.size();
  const std::size_t K = users.size();
  if (M == 0 || K == 0) throw DimensionError("channel_matrix: empty surface or user set");
  for (const auto& u : users.positions)
    if (!(u.z > 0.0)) throw ConfigError("channel_matrix: user behind or on the surface (z <= 0)");
  ChannelMatrix ch{ComplexMatrix(M, K), ComplexMatrix(M, K), 1.0};
  for (std::size_t k = 0; k < K; ++k) {
    auto col = ch.raw_H.col(k);
    for (std::size_t m = 0; m < M; ++m) col[m] = los_gain(users.positions[k], surface.antenna_positions[m], lambda);
  }
  const double norm = ch.raw_H.frobenius_norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("channel_matrix: degenerate raw channel norm");
  ch.scale = std::sqrt(static_cast<double>(M) * static_cast<double>(K)) / norm;
  ch.H = ch.raw_H;
  ch.H *= ch.scale;
  return ch;
}

/// Rows of H belonging to panel i (Mp x K), in the panel's antenna order.
inline ComplexMatrix panel_channel(const ChannelMatrix& ch, const SurfaceLayout& surface, std::size_t i) {
  if (i >= surface.P)
    throw DimensionError("panel_channel: panel index " + std::to_string(i) + " out of range (P = " +
                         std::to_string(surface.P) + ")");
  return gather_rows(ch.H, surface.panel_antennas[i]);
}

inline std::vector<ComplexMatrix> panel_channels(const ChannelMatrix& ch, const SurfaceLayout& surface) {
  std::vector<ComplexMatrix> slices;
  slices.reserve(surface.P);
  for (std::size_t i = 0; i < surface.P; ++i) slices.push_back(panel_channel(ch, surface, i));
  return slices;
}

/// Rectangle in the z = 0 plane.
struct SurfaceExtent {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Fraction of the user's radiated power captured by a λ/2-sampled surface:
/// sum over antennas of |h|^2 (λ/2)^2, a Riemann sum of the power density.
/// The grid holds floor(extent / pitch) cells per side, centered in the extent.
inline double captured_power_fraction(const Point3& user, const SurfaceExtent& extent, double lambda) {
  if (!(user.z > 0.0)) throw ConfigError("captured_power_fraction: user must be in front of the surface");
  const double pitch = lambda / 2.0;
  const double w = extent.x_max - extent.x_min;
  const double h = extent.y_max - extent.y_min;
  const auto nx = static_cast<std::size_t>(std::floor(w / pitch + 1e-9));
  const auto ny = static_cast<std::size_t>(std::floor(h / pitch + 1e-9));
  const double x0 = extent.x_min + (w - static_cast<double>(nx) * pitch) / 2.0;
  const double y0 = extent.y_min + (h - static_cast<double>(ny) * pitch) / 2.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < ny; ++r) {
    for (std::size_t c = 0; c < nx; ++c) {
      const Point2 a{x0 + (static_cast<double>(c) + 0.5) * pitch, y0 + (static_cast<double>(r) + 0.5) * pitch};
      sum += std::norm(los_gain(user, a, lambda));
    }
  }
  return sum * pitch * pitch;
}

/// Same Riemann sum over an existing layout.
inline double captured_power_fraction(const Point3& user, const SurfaceLayout& surface) {
  double sum = 0.0;
  for (const auto& a : surface.antenna_positions) sum += std::norm(los_gain(user, a, surface.lambda));
  return sum * surface.pitch * surface.pitch;
}

}  // namespace lis
