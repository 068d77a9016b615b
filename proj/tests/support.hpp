// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/maisac.hpp"

#include <complex>
#include <vector>

namespace maisac::testing {

/// Desk-scale scene: default physics with small arrays and node counts.
inline SceneParams desk_params(std::size_t n = 4, std::size_t l = 1, std::size_t j = 1, std::size_t k = 1,
                               double side_wavelengths = 100.0) {
  SceneParams p;
  p.num_tx = n;
  p.num_rx = n;
  p.num_targets = l;
  p.num_ul = j;
  p.num_dl = k;
  p.region_side = side_wavelengths * p.wavelength;
  p.region_gap = 10.0 * p.wavelength;
  return p;
}

struct Instance {
  Scenario sc;
  AntennaLayout layout;
  ChannelSet ch;
};

inline Instance random_instance(const SceneParams& p, std::uint64_t seed) {
  Instance in;
  in.sc = make_scenario(p, seed);
  in.layout = sample_layout(in.sc.tx_region, in.sc.rx_region, p.num_tx, p.num_rx, in.sc.min_spacing,
                            derive_seed(seed, 0x7e57));
  in.ch = build_channels(in.sc, in.layout);
  return in;
}

/// Random PSD matrix with trace `tr`.
inline CMat random_psd(Rng& rng, Eigen::Index n, double tr) {
  CMat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
  }
  CMat s = a * a.adjoint();
  return s * (tr / s.trace().real());
}

/// Random feasible transmit point (lifted form) with unit receive beamformers.
inline DesignVariables random_design(Rng& rng, const ChannelSet& ch, const Scenario& sc, double power_fraction = 1.0) {
  const Eigen::Index n = ch.num_tx(), m = ch.num_rx();
  DesignVariables dv;
  const std::size_t blocks = ch.num_targets() + ch.num_dl();
  std::vector<double> share(blocks);
  double total = 0.0;
  for (auto& s : share) total += (s = rng.uniform() + 0.05);
  std::size_t idx = 0;
  for (std::size_t l = 0; l < ch.num_targets(); ++l) {
    dv.S.push_back(random_psd(rng, n, power_fraction * sc.p_dl_max * share[idx++] / total));
    dv.u.push_back(rng.unit_vector(m));
  }
  for (std::size_t k = 0; k < ch.num_dl(); ++k) {
    dv.w.push_back(rng.unit_vector(n) * std::sqrt(power_fraction * sc.p_dl_max * share[idx++] / total));
  }
  dv.lift();
  for (std::size_t j = 0; j < ch.num_ul(); ++j) {
    dv.p.push_back(rng.uniform() * sc.p_ul_max);
    dv.b.push_back(rng.unit_vector(m));
  }
  return dv;
}

/// Direct entrywise evaluation of exp(+j 2 pi / lambda * |p - q|), independent of the library.
inline std::vector<std::complex<double>> oracle_response(const std::vector<Position3>& pts, const Position3& q,
                                                         double lambda) {
  std::vector<std::complex<double>> out;
  for (const auto& p : pts) {
    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    out.push_back(std::polar(1.0, 2.0 * std::numbers::pi * d / lambda));
  }
  return out;
}

}  // namespace maisac::testing

namespace maisac::testing {

/// Random Hermitian (S, W) and real p direction with block norms pd and pu.
inline DesignVariables random_direction(Rng& rng, const DesignVariables& like, double pd, double pu) {
  auto herm = [&](Eigen::Index n) {
    CMat h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) h(i, j) = rng.complex_normal();
    }
    h = hermitian_part(h);
    return CMat(h * (pd / h.norm()));
  };
  DesignVariables d;
  for (const auto& s : like.S) d.S.push_back(herm(s.rows()));
  for (const auto& w : like.W) d.W.push_back(herm(w.rows()));
  for (std::size_t j = 0; j < like.p.size(); ++j) d.p.push_back(pu * rng.normal());
  return d;
}

/// x + t d on the (S, W, p) blocks.
inline DesignVariables axpy(const DesignVariables& x, double t, const DesignVariables& d) {
  DesignVariables y = x;
  for (std::size_t l = 0; l < y.S.size(); ++l) y.S[l] += t * d.S[l];
  for (std::size_t k = 0; k < y.W.size(); ++k) y.W[k] += t * d.W[k];
  for (std::size_t j = 0; j < y.p.size(); ++j) y.p[j] += t * d.p[j];
  return y;
}

}  // namespace maisac::testing
