// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/error.hpp"
#include "maisac/propagation.hpp"
#include "maisac/rp_search.hpp"
#include "maisac/types.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace maisac {

/// Sum of the array responses toward every focus point.
inline CVec focusing_beamformer(std::span<const Position3> positions, std::span<const Position3> focus,
                                double wavelength) {
  require(!focus.empty(), "focusing_beamformer needs at least one focus point");
  CVec w = CVec::Zero(static_cast<Eigen::Index>(positions.size()));
  for (const auto& q : focus) w += response_vector(positions, q, wavelength);
  return w;
}

/// G(q) = |w^H a(q)| / N.
inline double beam_gain(const CVec& w, std::span<const Position3> positions, const Position3& q, double wavelength) {
  require(static_cast<std::size_t>(w.size()) == positions.size(), "beamformer length must match antenna count");
  return std::abs(w.dot(response_vector(positions, q, wavelength))) / static_cast<double>(positions.size());
}

inline std::vector<double> gains_at(const CVec& w, std::span<const Position3> positions,
                                    std::span<const Position3> points, double wavelength) {
  std::vector<double> g(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) g[i] = beam_gain(w, positions, points[i], wavelength);
  return g;
}

/// `count` evenly spaced points origin + s * direction/|direction| for s in [s_min, s_max].
inline std::vector<Position3> ray_points(const Position3& origin, const Position3& direction, double s_min,
                                         double s_max, std::size_t count) {
  require(count >= 2, "a ray needs at least two points");
  const double len = direction.norm();
  require(len > 0.0, "ray direction must be nonzero");
  const Position3 d = direction * (1.0 / len);
  std::vector<Position3> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = s_min + (s_max - s_min) * static_cast<double>(i) / static_cast<double>(count - 1);
    pts[i] = origin + d * s;
  }
  return pts;
}

enum class GridKind { kRect, kPolar };

/// Ground grid at fixed z. kRect: a = x, b = y. kPolar: a = horizontal
/// range from the origin, b = azimuth in radians; points are
/// (a cos b, a sin b, z).
struct GridSpec {
  GridKind kind = GridKind::kRect;
  double a_min = -30.0, a_max = 30.0;
  std::size_t na = 256;
  double b_min = 0.0, b_max = 30.0;
  std::size_t nb = 256;
  double z = -15.0;

  std::size_t points() const { return na * nb; }

  double a(std::size_t i) const {
    return na == 1 ? a_min : a_min + (a_max - a_min) * static_cast<double>(i) / static_cast<double>(na - 1);
  }
  double b(std::size_t j) const {
    return nb == 1 ? b_min : b_min + (b_max - b_min) * static_cast<double>(j) / static_cast<double>(nb - 1);
  }
  Position3 point(std::size_t i, std::size_t j) const {
    if (kind == GridKind::kRect) return {a(i), b(j), z};
    return {a(i) * std::cos(b(j)), a(i) * std::sin(b(j)), z};
  }
};

inline constexpr std::size_t kMaxGridPoints = 10'000'000;

/// Dense gain evaluation. values is row-major with b as the row index:
/// values[j * na + i] is the gain at spec.point(i, j).
struct GainGrid {
  GridSpec spec;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[j * spec.na + i]; }
};

inline GainGrid beampattern_grid(std::span<const Position3> positions, const CVec& w, const GridSpec& spec,
                                 double wavelength, std::size_t threads = 1) {
  require(spec.na >= 2 && spec.nb >= 2, "grid resolution must be at least 2x2");
  if (spec.na > kMaxGridPoints / spec.nb) {
    fail(ErrorKind::kResourceGuard, "grid of " + std::to_string(spec.na) + "x" + std::to_string(spec.nb) +
                                        " points exceeds the 1e7 point limit");
  }
  GainGrid grid{spec, std::vector<double>(spec.points())};
  parallel_for(spec.nb, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < spec.na; ++i) {
      grid.values[j * spec.na + i] = beam_gain(w, positions, spec.point(i, j), wavelength);
    }
  });
  return grid;
}

/// CSV with header x,y,gain; one row per grid point in storage order.
inline void write_grid_csv(const GainGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  char buf[96];
  out << "x,y,gain\n";
  for (std::size_t j = 0; j < grid.spec.nb; ++j) {
    for (std::size_t i = 0; i < grid.spec.na; ++i) {
      const Position3 q = grid.spec.point(i, j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", q.x, q.y, grid.at(i, j));
      out << buf;
    }
  }
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path + "'");
}

/// Raw little-endian float64 triplets (x, y, gain), same order as the CSV, no header.
inline void write_grid_binary(const GainGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  auto put = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
    out.write(bytes, 8);
  };
  for (std::size_t j = 0; j < grid.spec.nb; ++j) {
    for (std::size_t i = 0; i < grid.spec.na; ++i) {
      const Position3 q = grid.spec.point(i, j);
      put(q.x);
      put(q.y);
      put(grid.at(i, j));
    }
  }
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path + "'");
}

}  // namespace maisac
