// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/channels.hpp"
#include "maisac/scenario.hpp"

#include <cmath>
#include <vector>

namespace maisac {

/// Receive beamformers, transmit beamformers (vector and lifted), sensing
/// covariances and uplink powers for one antenna layout.
struct DesignVariables {
  std::vector<CVec> u;  // L receive beamformers for sensing, unit norm
  std::vector<CVec> b;  // J receive beamformers for UL, unit norm
  std::vector<CVec> w;  // K DL transmit beamformers
  std::vector<CMat> W;  // K lifted DL beamformers, W_k = w_k w_k^H when rank one
  std::vector<CMat> S;  // L sensing covariances
  std::vector<double> p;  // J UL powers

  /// Refreshes W from w.
  void lift() {
    W.resize(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) W[k] = w[k] * w[k].adjoint();
  }

  double dl_power() const {
    double t = 0.0;
    for (const auto& s : S) t += s.trace().real();
    for (const auto& wk : w) t += wk.squaredNorm();
    return t;
  }

  double dl_power_lifted() const {
    double t = 0.0;
    for (const auto& s : S) t += s.trace().real();
    for (const auto& wk : W) t += wk.trace().real();
    return t;
  }
};

struct RateReport {
  std::vector<double> gamma_s, gamma_u, gamma_d;
  std::vector<double> rate_s, rate_u, rate_d;
  double wsr = 0.0;
};

/// R = sum_l S_l + sum_k w_k w_k^H.
inline CMat transmit_covariance(std::span<const CMat> s, std::span<const CVec> w, Eigen::Index n) {
  CMat r = CMat::Zero(n, n);
  for (const auto& sl : s) r += sl;
  for (const auto& wk : w) r.noalias() += wk * wk.adjoint();
  return r;
}

/// R with lifted W_k in place of w_k w_k^H.
inline CMat transmit_covariance_lifted(std::span<const CMat> s, std::span<const CMat> w_lifted, Eigen::Index n) {
  CMat r = CMat::Zero(n, n);
  for (const auto& sl : s) r += sl;
  for (const auto& wk : w_lifted) r += wk;
  return r;
}

namespace detail {

/// x^H R x for Hermitian R, clamped at zero against rounding.
inline double quad(const CMat& r, const CVec& x) { return std::max(0.0, x.dot(r * x).real()); }

struct SinrParts {
  double signal = 0.0;
  double interference_noise = 0.0;
  double sinr() const { return signal / interference_noise; }
};

inline SinrParts sensing_parts(std::size_t l, const CVec& u, const CMat& r, std::span<const double> p,
                               const ChannelSet& ch, double noise_bs) {
  const CVec a = ch.g[l].adjoint() * u;
  const CVec e = ch.interference_except(l).adjoint() * u;
  double den = quad(r, e) + noise_bs * u.squaredNorm();
  for (std::size_t j = 0; j < ch.f.size(); ++j) den += p[j] * std::norm(u.dot(ch.f[j]));
  return {quad(r, a), den};
}

inline SinrParts ul_parts(std::size_t j, const CVec& b, const CMat& r, std::span<const double> p, const ChannelSet& ch,
                          double noise_bs) {
  const CVec e = ch.interference_all().adjoint() * b;
  double den = quad(r, e) + noise_bs * b.squaredNorm();
  for (std::size_t i = 0; i < ch.f.size(); ++i) {
    if (i != j) den += p[i] * std::norm(b.dot(ch.f[i]));
  }
  return {p[j] * std::norm(b.dot(ch.f[j])), den};
}

/// `own` is h_k^H (w_k w_k^H or W_k) h_k; `total` is h_k^H R h_k.
inline SinrParts dl_parts(double own, double total, double noise) { return {own, std::max(0.0, total - own) + noise}; }

}  // namespace detail

inline double sensing_sinr(std::size_t l, const DesignVariables& dv, const ChannelSet& ch, double noise_bs) {
  const CMat r = transmit_covariance(dv.S, dv.w, ch.num_tx());
  return detail::sensing_parts(l, dv.u[l], r, dv.p, ch, noise_bs).sinr();
}

inline double ul_sinr(std::size_t j, const DesignVariables& dv, const ChannelSet& ch, double noise_bs) {
  const CMat r = transmit_covariance(dv.S, dv.w, ch.num_tx());
  return detail::ul_parts(j, dv.b[j], r, dv.p, ch, noise_bs).sinr();
}

inline double dl_sinr(std::size_t k, const DesignVariables& dv, const ChannelSet& ch, double noise_dl) {
  const CVec& hk = ch.h[k];
  double interference = noise_dl;
  for (std::size_t i = 0; i < dv.w.size(); ++i) {
    if (i != k) interference += std::norm(hk.dot(dv.w[i]));
  }
  for (const auto& sl : dv.S) interference += detail::quad(sl, hk);
  return std::norm(hk.dot(dv.w[k])) / interference;
}

namespace detail {

inline RateReport assemble_report(const Scenario& sc, RateReport rep) {
  auto rates = [](const std::vector<double>& g, std::vector<double>& out) {
    out.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::log2(1.0 + g[i]);
  };
  rates(rep.gamma_s, rep.rate_s);
  rates(rep.gamma_u, rep.rate_u);
  rates(rep.gamma_d, rep.rate_d);
  rep.wsr = 0.0;
  for (std::size_t l = 0; l < rep.rate_s.size(); ++l) rep.wsr += sc.weights.sensing[l] * rep.rate_s[l];
  for (std::size_t j = 0; j < rep.rate_u.size(); ++j) rep.wsr += sc.weights.ul[j] * rep.rate_u[j];
  for (std::size_t k = 0; k < rep.rate_d.size(); ++k) rep.wsr += sc.weights.dl[k] * rep.rate_d[k];
  return rep;
}

inline RateReport report_for(const CMat& r, std::span<const double> dl_own, const DesignVariables& dv,
                             const ChannelSet& ch, const Scenario& sc) {
  RateReport rep;
  for (std::size_t l = 0; l < ch.num_targets(); ++l) {
    rep.gamma_s.push_back(sensing_parts(l, dv.u[l], r, dv.p, ch, sc.noise_bs).sinr());
  }
  for (std::size_t j = 0; j < ch.num_ul(); ++j) {
    rep.gamma_u.push_back(ul_parts(j, dv.b[j], r, dv.p, ch, sc.noise_bs).sinr());
  }
  for (std::size_t k = 0; k < ch.num_dl(); ++k) {
    rep.gamma_d.push_back(dl_parts(dl_own[k], quad(r, ch.h[k]), sc.noise_dl[k]).sinr());
  }
  return assemble_report(sc, std::move(rep));
}

}  // namespace detail

/// Rates and weighted sum rate for the physical (vector) DL beamformers.
inline RateReport wsr(const DesignVariables& dv, const ChannelSet& ch, const Scenario& sc) {
  RateReport rep;
  for (std::size_t l = 0; l < ch.num_targets(); ++l) rep.gamma_s.push_back(sensing_sinr(l, dv, ch, sc.noise_bs));
  for (std::size_t j = 0; j < ch.num_ul(); ++j) rep.gamma_u.push_back(ul_sinr(j, dv, ch, sc.noise_bs));
  for (std::size_t k = 0; k < ch.num_dl(); ++k) rep.gamma_d.push_back(dl_sinr(k, dv, ch, sc.noise_dl[k]));
  return detail::assemble_report(sc, std::move(rep));
}

/// Same objective evaluated on the lifted W_k (the relaxed problem's variables).
inline RateReport wsr_lifted(const DesignVariables& dv, const ChannelSet& ch, const Scenario& sc) {
  const CMat r = transmit_covariance_lifted(dv.S, dv.W, ch.num_tx());
  std::vector<double> own(ch.num_dl());
  for (std::size_t k = 0; k < ch.num_dl(); ++k) own[k] = detail::quad(dv.W[k], ch.h[k]);
  return detail::report_for(r, own, dv, ch, sc);
}

}  // namespace maisac
