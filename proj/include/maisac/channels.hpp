// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/propagation.hpp"
#include "maisac/scenario.hpp"

#include <vector>

namespace maisac {

/// All line-of-sight channels for one antenna layout.
struct ChannelSet {
  CMat h_si;               // M x N
  std::vector<CVec> h;     // K, each N (DL users)
  std::vector<CVec> f;     // J, each M (UL users)
  std::vector<CMat> g;     // L, each M x N (round-trip target channels)
  std::vector<CVec> g_t;   // L, each N
  std::vector<CVec> g_r;   // L, each M

  Eigen::Index num_tx() const { return h_si.cols(); }
  Eigen::Index num_rx() const { return h_si.rows(); }
  std::size_t num_targets() const { return g.size(); }
  std::size_t num_ul() const { return f.size(); }
  std::size_t num_dl() const { return h.size(); }

  /// A_l: every target channel except `l`, plus self-interference.
  CMat interference_except(std::size_t l) const {
    CMat a = h_si;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i != l) a += g[i];
    }
    return a;
  }

  /// A: every target channel plus self-interference.
  CMat interference_all() const {
    CMat a = h_si;
    for (const auto& gi : g) a += gi;
    return a;
  }
};

inline CMat si_channel(std::span<const Position3> t, std::span<const Position3> r, double si_coeff, double wavelength) {
  require(wavelength > 0.0, "wavelength must be positive");
  require(!t.empty() && !r.empty(), "SI channel needs both arrays");
  const double k = 2.0 * kPi / wavelength;
  CMat h(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(t.size()));
  for (std::size_t m = 0; m < r.size(); ++m) {
    for (std::size_t n = 0; n < t.size(); ++n) {
      h(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = std::polar(si_coeff, k * distance(t[n], r[m]));
    }
  }
  return h;
}

struct CommChannels {
  std::vector<CVec> h;
  std::vector<CVec> f;
};

inline CommChannels comm_channels(const AntennaLayout& layout, std::span<const Node> ul_users,
                                  std::span<const Node> dl_users, double wavelength) {
  CommChannels out;
  for (const auto& u : dl_users) out.h.push_back(u.coeff * response_vector(layout.transmit, u.position, wavelength));
  for (const auto& u : ul_users) out.f.push_back(u.coeff * response_vector(layout.receive, u.position, wavelength));
  return out;
}

struct SensingChannels {
  std::vector<CMat> g;
  std::vector<CVec> g_t;
  std::vector<CVec> g_r;
};

inline SensingChannels sensing_channels(const AntennaLayout& layout, std::span<const Node> targets, double wavelength) {
  SensingChannels out;
  for (const auto& tg : targets) {
    CVec gt = response_vector(layout.transmit, tg.position, wavelength);
    CVec gr = response_vector(layout.receive, tg.position, wavelength);
    out.g.push_back(tg.coeff * gr * gt.adjoint());
    out.g_t.push_back(std::move(gt));
    out.g_r.push_back(std::move(gr));
  }
  return out;
}

inline ChannelSet build_channels(const Scenario& sc, const AntennaLayout& layout) {
  ChannelSet ch;
  ch.h_si = si_channel(layout.transmit, layout.receive, sc.si_coeff, sc.wavelength);
  auto comm = comm_channels(layout, sc.ul_users, sc.dl_users, sc.wavelength);
  ch.h = std::move(comm.h);
  ch.f = std::move(comm.f);
  auto sens = sensing_channels(layout, sc.targets, sc.wavelength);
  ch.g = std::move(sens.g);
  ch.g_t = std::move(sens.g_t);
  ch.g_r = std::move(sens.g_r);
  return ch;
}

}  // namespace maisac
