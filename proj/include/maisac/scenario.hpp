// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/error.hpp"
#include "maisac/propagation.hpp"
#include "maisac/random.hpp"
#include "maisac/types.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace maisac {

/// Square antenna moving region in the z = 0 plane.
struct MovingRegion {
  Position3 center;
  double side = 0.0;

  bool contains(const Position3& p, double tol = 1e-12) const {
    const double half = 0.5 * side + tol;
    return std::abs(p.x - center.x) <= half && std::abs(p.y - center.y) <= half &&
           std::abs(p.z - center.z) <= tol;
  }
};

struct AntennaLayout {
  std::vector<Position3> transmit;
  std::vector<Position3> receive;
  double min_spacing = 0.0;
};

/// Smallest pairwise distance within one array (infinity for fewer than two).
inline double min_pairwise_distance(std::span<const Position3> pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::min(best, distance(pts[a], pts[b]));
  }
  return best;
}

/// Region membership and minimum-spacing check for both arrays.
inline bool layout_feasible(const AntennaLayout& layout, const MovingRegion& tx, const MovingRegion& rx,
                            double tol = 1e-12) {
  for (const auto& p : layout.transmit) {
    if (!p.finite() || !tx.contains(p, tol)) return false;
  }
  for (const auto& p : layout.receive) {
    if (!p.finite() || !rx.contains(p, tol)) return false;
  }
  return min_pairwise_distance(layout.transmit) >= layout.min_spacing - tol &&
         min_pairwise_distance(layout.receive) >= layout.min_spacing - tol;
}

/// A target or single-antenna user: position plus channel amplitude
/// (path loss for users, round-trip coefficient for targets).
struct Node {
  Position3 position;
  double coeff = 0.0;
};

struct RateWeights {
  std::vector<double> sensing;
  std::vector<double> ul;
  std::vector<double> dl;

  static RateWeights equal(std::size_t l, std::size_t j, std::size_t k) {
    const std::size_t total = l + j + k;
    const double w = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
    return {std::vector<double>(l, w), std::vector<double>(j, w), std::vector<double>(k, w)};
  }

  double sum() const {
    return std::accumulate(sensing.begin(), sensing.end(), 0.0) + std::accumulate(ul.begin(), ul.end(), 0.0) +
           std::accumulate(dl.begin(), dl.end(), 0.0);
  }
};

/// Everything physical about a run except the antenna positions, in linear SI units.
struct Scenario {
  double wavelength = 0.01;
  MovingRegion tx_region;
  MovingRegion rx_region;
  double region_gap = -1.0;  // inner-edge separation; negative: derived from the regions
  double min_spacing = 0.005;

  std::vector<Node> targets;
  std::vector<Node> ul_users;
  std::vector<Node> dl_users;

  double si_coeff = 1e-5;
  double noise_bs = 1e-10;
  std::vector<double> noise_dl;  // one per DL user
  double p_dl_max = 10.0;
  double p_ul_max = 0.01;
  RateWeights weights;

  std::size_t num_targets() const { return targets.size(); }
  std::size_t num_ul() const { return ul_users.size(); }
  std::size_t num_dl() const { return dl_users.size(); }

  void validate() const {
    require(wavelength > 0.0 && std::isfinite(wavelength), "wavelength must be positive");
    require(tx_region.side > 0.0 && rx_region.side > 0.0, "region side length must be positive");
    require(min_spacing >= 0.0, "minimum spacing must be nonnegative");
    require(si_coeff >= 0.0 && si_coeff < 1.0, "SI loss coefficient must lie in [0, 1)");
    require(noise_bs > 0.0, "BS noise power must be positive");
    require(noise_dl.size() == dl_users.size(), "need one DL noise power per DL user");
    for (double n : noise_dl) require(n > 0.0, "DL noise power must be positive");
    require(p_dl_max > 0.0 && p_ul_max > 0.0, "power budgets must be positive");
    require(weights.sensing.size() == targets.size() && weights.ul.size() == ul_users.size() &&
                weights.dl.size() == dl_users.size(),
            "weight counts must match target/user counts");
    for (const auto* ws : {&weights.sensing, &weights.ul, &weights.dl}) {
      for (double w : *ws) require(w >= 0.0 && std::isfinite(w), "rate weights must be nonnegative");
    }
    require(std::abs(weights.sum() - 1.0) <= 1e-9, "rate weights must sum to 1");
    for (const auto* nodes : {&targets, &ul_users, &dl_users}) {
      for (const auto& n : *nodes) require(n.position.finite() && n.coeff >= 0.0, "node must be finite");
    }
  }
};

/// Boundary between near and far field for an aperture of side `side`.
inline double rayleigh_distance(double side, double wavelength) {
  require(side > 0.0 && wavelength > 0.0, "rayleigh_distance needs positive side and wavelength");
  return 4.0 * side * side / wavelength;
}

/// Transmit and receive regions side by side along x, separated by `gap`,
/// with the midpoint between them at the origin.
inline std::pair<MovingRegion, MovingRegion> make_regions(double side, double gap) {
  require(side > 0.0 && gap >= 0.0, "region side must be positive and gap nonnegative");
  const double offset = 0.5 * (side + gap);
  return {MovingRegion{{-offset, 0.0, 0.0}, side}, MovingRegion{{offset, 0.0, 0.0}, side}};
}

namespace detail {

inline std::vector<Position3> sample_region(const MovingRegion& region, std::size_t count, double spacing, Rng& rng,
                                            std::size_t& attempts, std::size_t max_attempts) {
  std::vector<Position3> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    if (attempts >= max_attempts) {
      fail(ErrorKind::kInfeasibleLayout,
           "rejection sampling exceeded " + std::to_string(max_attempts) + " attempts after placing " +
               std::to_string(pts.size()) + " of " + std::to_string(count) + " antennas");
    }
    ++attempts;
    const Position3 cand{region.center.x + (rng.uniform() - 0.5) * region.side,
                         region.center.y + (rng.uniform() - 0.5) * region.side, region.center.z};
    const bool ok = std::all_of(pts.begin(), pts.end(), [&](const Position3& p) { return distance(p, cand) >= spacing; });
    if (ok) pts.push_back(cand);
  }
  return pts;
}

}  // namespace detail

inline constexpr std::size_t kDefaultLayoutAttempts = 1'000'000;

/// Uniform random layout satisfying region and spacing constraints.
/// Deterministic in `seed`; the transmit array is drawn first, then the receive array.
inline AntennaLayout sample_layout(const MovingRegion& region_t, const MovingRegion& region_r, std::size_t n,
                                   std::size_t m, double spacing, std::uint64_t seed,
                                   std::size_t max_attempts = kDefaultLayoutAttempts) {
  require(n >= 1 && m >= 1, "sample_layout needs at least one antenna per array");
  require(spacing >= 0.0, "minimum spacing must be nonnegative");
  require(region_t.side > 0.0 && region_r.side > 0.0, "region side must be positive");
  const double disc = spacing * spacing * kPi / 4.0;
  if (static_cast<double>(n) * disc >= region_t.side * region_t.side ||
      static_cast<double>(m) * disc >= region_r.side * region_r.side) {
    fail(ErrorKind::kInfeasibleLayout, "antenna count cannot fit in region at the requested spacing");
  }
  Rng rng(seed);
  std::size_t attempts = 0;
  AntennaLayout layout;
  layout.min_spacing = spacing;
  layout.transmit = detail::sample_region(region_t, n, spacing, rng, attempts, max_attempts);
  layout.receive = detail::sample_region(region_r, m, spacing, rng, attempts, max_attempts);
  return layout;
}

/// Most-square exact factorization rows x cols = n with rows <= cols.
inline std::pair<std::size_t, std::size_t> grid_shape(std::size_t n) {
  require(n >= 1, "grid needs at least one antenna");
  std::size_t rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (rows > 1 && n % rows != 0) --rows;
  return {rows, n / rows};
}

namespace detail {

inline std::vector<Position3> upa(const Position3& center, std::size_t n, double pitch_x, double pitch_y) {
  const auto [rows, cols] = grid_shape(n);
  std::vector<Position3> pts;
  pts.reserve(n);
  const double x0 = center.x - 0.5 * pitch_x * static_cast<double>(cols - 1);
  const double y0 = center.y - 0.5 * pitch_y * static_cast<double>(rows - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      pts.push_back({x0 + pitch_x * static_cast<double>(c), y0 + pitch_y * static_cast<double>(r), center.z});
    }
  }
  return pts;
}

}  // namespace detail

/// Full-aperture uniform planar array: corners of the grid sit on the region corners.
/// Positions are row-major (y outer, x inner).
inline std::vector<Position3> fpaf_positions(const MovingRegion& region, std::size_t n) {
  require(n >= 1, "FPAF needs at least one antenna");
  const auto [rows, cols] = grid_shape(n);
  const double px = cols > 1 ? region.side / static_cast<double>(cols - 1) : 0.0;
  const double py = rows > 1 ? region.side / static_cast<double>(rows - 1) : 0.0;
  return detail::upa(region.center, n, px, py);
}

/// Half-wavelength uniform planar array centered on `center`.
inline std::vector<Position3> fpah_positions(const Position3& center, double wavelength, std::size_t n) {
  require(n >= 1, "FPAH needs at least one antenna");
  require(wavelength > 0.0, "wavelength must be positive");
  return detail::upa(center, n, 0.5 * wavelength, 0.5 * wavelength);
}

inline AntennaLayout fpaf_layout(const Scenario& sc, std::size_t n, std::size_t m) {
  return {fpaf_positions(sc.tx_region, n), fpaf_positions(sc.rx_region, m), sc.min_spacing};
}

/// Half-wavelength arrays pressed against the inner edge of each region (the
/// edge facing the other array), centered in y. The inner edges sit at
/// x = -gap/2 and +gap/2 whatever the side length, so this layout does not depend on A.
inline AntennaLayout fpah_layout(const Scenario& sc, std::size_t n, std::size_t m) {
  // Edges from the gap, not from center +- side/2, so no A-dependent rounding enters.
  const double mid = 0.5 * (sc.tx_region.center.x + sc.rx_region.center.x);
  const double gap = sc.region_gap >= 0.0 ? sc.region_gap
                                          : std::abs(sc.rx_region.center.x - sc.tx_region.center.x) -
                                                0.5 * (sc.tx_region.side + sc.rx_region.side);
  auto place = [&](const MovingRegion& region, std::size_t count, double toward) {
    const auto [rows, cols] = grid_shape(count);
    const double half_w = 0.25 * sc.wavelength * static_cast<double>(cols - 1);
    const double half_h = 0.25 * sc.wavelength * static_cast<double>(rows - 1);
    if (2.0 * half_w > region.side || 2.0 * half_h > region.side) {
      fail(ErrorKind::kInfeasibleLayout, "half-wavelength array does not fit in the moving region");
    }
    const double edge = mid - toward * 0.5 * gap;
    return fpah_positions({edge - toward * half_w, region.center.y, region.center.z}, sc.wavelength, count);
  };
  const double dir = sc.tx_region.center.x <= sc.rx_region.center.x ? 1.0 : -1.0;
  return {place(sc.tx_region, n, dir), place(sc.rx_region, m, -dir), sc.min_spacing};
}

/// Scene-generation parameters in linear SI units. Defaults reproduce the
/// reference simulation table (lambda = 1 cm, A = 100 lambda, N = M = 8, L = J = K = 2).
struct SceneParams {
  double wavelength = 0.01;
  double region_side = 1.0;
  double region_gap = 0.1;
  std::size_t num_tx = 8;
  std::size_t num_rx = 8;
  std::size_t num_targets = 2;
  std::size_t num_ul = 2;
  std::size_t num_dl = 2;
  double min_spacing = 0.005;
  double si_coeff = db_to_amplitude(-100.0);
  double round_trip_coeff = db_to_amplitude(-50.0);
  double p_ul_max = dbm_to_watt(10.0);
  double p_dl_max = dbm_to_watt(40.0);
  double noise_bs = dbm_to_watt(-70.0);
  double noise_dl = dbm_to_watt(-70.0);
  double bs_height = 15.0;
  double ring_min = 25.0;
  double ring_max = 30.0;
  std::optional<RateWeights> weights;
  // When set, these replace the random node drop (coefficients still derived when <= 0).
  std::optional<std::vector<Node>> targets;
  std::optional<std::vector<Node>> ul_users;
  std::optional<std::vector<Node>> dl_users;
};

/// Random node on the ground half-annulus y >= 0 below the array plane.
inline Position3 sample_ground_node(Rng& rng, double height, double rmin, double rmax) {
  const double r = rng.uniform(rmin, rmax);
  const double phi = rng.uniform(0.0, kPi);
  return {r * std::cos(phi), r * std::sin(phi), -height};
}

/// Builds a concrete scenario: node positions are drawn from `seed` unless given explicitly.
inline Scenario make_scenario(const SceneParams& p, std::uint64_t seed) {
  require(p.ring_min > 0.0 && p.ring_max >= p.ring_min, "node distance ring must be positive and ordered");
  Scenario sc;
  sc.wavelength = p.wavelength;
  std::tie(sc.tx_region, sc.rx_region) = make_regions(p.region_side, p.region_gap);
  sc.region_gap = p.region_gap;
  sc.min_spacing = p.min_spacing;
  sc.si_coeff = p.si_coeff;
  sc.noise_bs = p.noise_bs;
  sc.p_dl_max = p.p_dl_max;
  sc.p_ul_max = p.p_ul_max;

  Rng rng(derive_seed(seed, 0x5ce4e));
  auto drop = [&](std::size_t count, const std::optional<std::vector<Node>>& given, bool target) {
    std::vector<Node> nodes;
    if (given) {
      nodes = *given;
    } else {
      for (std::size_t i = 0; i < count; ++i) nodes.push_back({sample_ground_node(rng, p.bs_height, p.ring_min, p.ring_max), 0.0});
    }
    for (auto& n : nodes) {
      if (n.coeff <= 0.0) n.coeff = target ? p.round_trip_coeff : usw_path_loss(n.position.norm(), p.wavelength);
    }
    return nodes;
  };
  sc.targets = drop(p.num_targets, p.targets, true);
  sc.ul_users = drop(p.num_ul, p.ul_users, false);
  sc.dl_users = drop(p.num_dl, p.dl_users, false);
  sc.noise_dl.assign(sc.dl_users.size(), p.noise_dl);
  sc.weights = p.weights ? *p.weights : RateWeights::equal(sc.targets.size(), sc.ul_users.size(), sc.dl_users.size());
  sc.validate();
  return sc;
}

}  // namespace maisac
