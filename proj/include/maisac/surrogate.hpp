// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/linalg.hpp"
#include "maisac/metrics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace maisac {

/// log2 of an affine function of the lifted transmit variables:
///   a(S, W, p) = sum_l tr(S_l C) + sum_{k in mask} tr(W_k C) + sum_j p_j d_j + c.
/// With fixed receive beamformers every SINR numerator-plus-denominator and
/// every denominator has this form, so the objective is a difference of
/// sums of such concave terms.
struct LogAffineTerm {
  double weight = 0.0;
  CMat coef;                  // C, Hermitian PSD
  std::vector<char> w_mask;   // which W_k enter the affine function
  RVec p_coef;                // d_j >= 0
  double constant = 0.0;      // c > 0 (noise floor)

  double affine(const DesignVariables& x) const {
    double a = constant;
    for (const auto& s : x.S) a += trace_product(s, coef);
    for (std::size_t k = 0; k < x.W.size(); ++k) {
      if (w_mask[k]) a += trace_product(x.W[k], coef);
    }
    for (Eigen::Index j = 0; j < p_coef.size(); ++j) a += x.p[static_cast<std::size_t>(j)] * p_coef(j);
    return a;
  }

  double value(const DesignVariables& x) const { return weight * std::log2(affine(x)); }
};

/// Gradient of a scalar function with respect to (S_l, W_k, p_j).
struct BlockGradient {
  std::vector<CMat> S;
  std::vector<CMat> W;
  RVec p;

  static BlockGradient zero(std::size_t l, std::size_t k, std::size_t j, Eigen::Index n) {
    return {std::vector<CMat>(l, CMat::Zero(n, n)), std::vector<CMat>(k, CMat::Zero(n, n)),
            RVec::Zero(static_cast<Eigen::Index>(j))};
  }

  /// Adds `scale` times the gradient of log2(term.affine) at affine value `a`.
  void add_log_term(const LogAffineTerm& t, double a, double scale) {
    const double c = scale * t.weight / (a * std::numbers::ln2);
    for (auto& s : S) s += c * t.coef;
    for (std::size_t k = 0; k < W.size(); ++k) {
      if (t.w_mask[k]) W[k] += c * t.coef;
    }
    p += c * t.p_coef;
  }

  /// Directional derivative sum Re tr(G^H D) + sum g_j d_j.
  double directional(const DesignVariables& d) const {
    double v = 0.0;
    for (std::size_t l = 0; l < S.size(); ++l) v += inner(S[l], d.S[l]);
    for (std::size_t k = 0; k < W.size(); ++k) v += inner(W[k], d.W[k]);
    for (Eigen::Index j = 0; j < p.size(); ++j) v += p(j) * d.p[static_cast<std::size_t>(j)];
    return v;
  }
};

/// The six concave pieces alpha_1..3 (log of signal + interference + noise)
/// and beta_1..3 (log of interference + noise) for sensing, UL and DL.
/// Interference matrices A_l and A are used whole, so cross terms between
/// target echoes and self-interference are kept and
///   sum(alpha) - sum(beta) equals the lifted weighted sum rate exactly.
struct LogTermModel {
  std::array<std::vector<LogAffineTerm>, 3> alpha;
  std::array<std::vector<LogAffineTerm>, 3> beta;
  Eigen::Index n = 0;
  std::size_t num_targets = 0, num_ul = 0, num_dl = 0;

  double alpha_value(std::size_t i, const DesignVariables& x) const {
    double v = 0.0;
    for (const auto& t : alpha[i]) v += t.value(x);
    return v;
  }
  double beta_value(std::size_t i, const DesignVariables& x) const {
    double v = 0.0;
    for (const auto& t : beta[i]) v += t.value(x);
    return v;
  }
  double alpha_total(const DesignVariables& x) const { return alpha_value(0, x) + alpha_value(1, x) + alpha_value(2, x); }
  double beta_total(const DesignVariables& x) const { return beta_value(0, x) + beta_value(1, x) + beta_value(2, x); }

  /// Lifted weighted sum rate: sum(alpha) - sum(beta).
  double wsr(const DesignVariables& x) const { return alpha_total(x) - beta_total(x); }

  BlockGradient zero_gradient() const { return BlockGradient::zero(num_targets, num_dl, num_ul, n); }

  BlockGradient alpha_gradient(std::size_t i, const DesignVariables& x) const {
    BlockGradient g = zero_gradient();
    for (const auto& t : alpha[i]) g.add_log_term(t, t.affine(x), 1.0);
    return g;
  }
  BlockGradient beta_gradient(std::size_t i, const DesignVariables& x) const {
    BlockGradient g = zero_gradient();
    for (const auto& t : beta[i]) g.add_log_term(t, t.affine(x), 1.0);
    return g;
  }
};

/// Builds the alpha/beta terms for fixed receive beamformers dv.u, dv.b.
inline LogTermModel build_log_terms(const DesignVariables& dv, const ChannelSet& ch, const Scenario& sc) {
  LogTermModel m;
  m.n = ch.num_tx();
  m.num_targets = ch.num_targets();
  m.num_ul = ch.num_ul();
  m.num_dl = ch.num_dl();
  const auto jn = static_cast<Eigen::Index>(m.num_ul);
  const std::vector<char> all_w(m.num_dl, 1);

  for (std::size_t l = 0; l < m.num_targets; ++l) {
    const CVec& u = dv.u[l];
    const CVec a = ch.g[l].adjoint() * u;
    const CVec e = ch.interference_except(l).adjoint() * u;
    RVec d(jn);
    for (std::size_t j = 0; j < m.num_ul; ++j) d(static_cast<Eigen::Index>(j)) = std::norm(u.dot(ch.f[j]));
    const double c = sc.noise_bs * u.squaredNorm();
    const CMat ee = e * e.adjoint();
    const double w = sc.weights.sensing[l];
    m.alpha[0].push_back({w, hermitian_part(a * a.adjoint() + ee), all_w, d, c});
    m.beta[0].push_back({w, ee, all_w, d, c});
  }

  const CMat a_all = ch.interference_all();
  for (std::size_t j = 0; j < m.num_ul; ++j) {
    const CVec& b = dv.b[j];
    const CVec e = a_all.adjoint() * b;
    RVec d(jn);
    for (std::size_t i = 0; i < m.num_ul; ++i) d(static_cast<Eigen::Index>(i)) = std::norm(b.dot(ch.f[i]));
    RVec d_other = d;
    d_other(static_cast<Eigen::Index>(j)) = 0.0;
    const double c = sc.noise_bs * b.squaredNorm();
    const CMat ee = e * e.adjoint();
    const double w = sc.weights.ul[j];
    m.alpha[1].push_back({w, ee, all_w, d, c});
    m.beta[1].push_back({w, ee, all_w, d_other, c});
  }

  for (std::size_t k = 0; k < m.num_dl; ++k) {
    const CMat hh = ch.h[k] * ch.h[k].adjoint();
    std::vector<char> others(m.num_dl, 1);
    others[k] = 0;
    const double w = sc.weights.dl[k];
    m.alpha[2].push_back({w, hh, all_w, RVec::Zero(jn), sc.noise_dl[k]});
    m.beta[2].push_back({w, hh, others, RVec::Zero(jn), sc.noise_dl[k]});
  }
  return m;
}

/// First-order expansion of beta_1..3 at an anchor point.
struct SurrogateExpansion {
  LogTermModel model;
  DesignVariables anchor;  // uses S, W, p
  std::array<double, 3> beta_at_anchor{};
  std::array<BlockGradient, 3> beta_grad;

  /// beta_hat_i(x) = beta_i(anchor) + <grad beta_i(anchor), x - anchor>.
  double beta_hat(std::size_t i, const DesignVariables& x) const {
    DesignVariables d;
    d.S.resize(x.S.size());
    d.W.resize(x.W.size());
    d.p.resize(x.p.size());
    for (std::size_t l = 0; l < x.S.size(); ++l) d.S[l] = x.S[l] - anchor.S[l];
    for (std::size_t k = 0; k < x.W.size(); ++k) d.W[k] = x.W[k] - anchor.W[k];
    for (std::size_t j = 0; j < x.p.size(); ++j) d.p[j] = x.p[j] - anchor.p[j];
    return beta_at_anchor[i] + beta_grad[i].directional(d);
  }
};

/// Values and gradients of beta_1..3 at `anchor` (its S, W, p), for the
/// receive beamformers stored in `anchor`.
inline SurrogateExpansion surrogate_gradients(const DesignVariables& anchor, const ChannelSet& ch, const Scenario& sc) {
  SurrogateExpansion ex;
  ex.model = build_log_terms(anchor, ch, sc);
  ex.anchor = anchor;
  for (std::size_t i = 0; i < 3; ++i) {
    ex.beta_at_anchor[i] = ex.model.beta_value(i, anchor);
    ex.beta_grad[i] = ex.model.beta_gradient(i, anchor);
    for (auto& g : ex.beta_grad[i].S) g = hermitian_part(g);
    for (auto& g : ex.beta_grad[i].W) g = hermitian_part(g);
  }
  return ex;
}

/// alpha_1 + alpha_2 + alpha_3 - beta_hat_1 - beta_hat_2 - beta_hat_3:
/// a concave minorant of the lifted weighted sum rate, tight at the anchor.
inline double surrogate_eval(const DesignVariables& x, const SurrogateExpansion& ex) {
  double v = ex.model.alpha_total(x);
  for (std::size_t i = 0; i < 3; ++i) v -= ex.beta_hat(i, x);
  return v;
}

}  // namespace maisac
