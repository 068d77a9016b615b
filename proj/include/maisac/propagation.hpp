// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/error.hpp"
#include "maisac/types.hpp"

#include <span>

namespace maisac {

/// Near-field response: entry i is exp(+j 2pi/lambda * |p_i - q|).
inline CVec response_vector(std::span<const Position3> positions, const Position3& q, double wavelength) {
  require(wavelength > 0.0, "wavelength must be positive");
  require(!positions.empty(), "response_vector needs at least one position");
  const double k = 2.0 * kPi / wavelength;
  CVec a(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    a(static_cast<Eigen::Index>(i)) = std::polar(1.0, k * distance(positions[i], q));
  }
  return a;
}

/// Free-space amplitude lambda / (4 pi d).
inline double usw_path_loss(double dist, double wavelength) {
  require(dist > 0.0 && std::isfinite(dist), "path-loss distance must be positive");
  require(wavelength > 0.0, "wavelength must be positive");
  return wavelength / (4.0 * kPi * dist);
}

}  // namespace maisac
