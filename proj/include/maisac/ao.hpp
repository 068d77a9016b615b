// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/error.hpp"
#include "maisac/linalg.hpp"
#include "maisac/metrics.hpp"
#include "maisac/sca.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace maisac {

inline constexpr double kMaxConditionNumber = 1e12;

namespace detail {

/// Q^{-1} v / ||Q^{-1} v|| for Hermitian positive definite Q.
inline CVec whitened_direction(const CMat& q, const CVec& v, const char* what) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(q));
  const RVec& ev = es.eigenvalues();
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    fail(ErrorKind::kNumericalConditioning,
         std::string(what) + " interference-plus-noise matrix condition number exceeds 1e12");
  }
  const CVec x = es.eigenvectors() * (ev.cwiseInverse().cast<cd>().asDiagonal() * (es.eigenvectors().adjoint() * v));
  return x / x.norm();
}

/// Dominant direction of a Hermitian PSD matrix, or an empty vector if it is zero.
inline CVec dominant_direction(const CMat& x) {
  if (x.norm() == 0.0) return {};
  return principal_eigenpair(x).vector;
}

}  // namespace detail

struct ReceiveBeamformers {
  std::vector<CVec> u;
  std::vector<CVec> b;
};

/// Closed-form SINR-maximizing receive beamformers for fixed (S, w, p):
///   u_l = Q_l^{-1} g_l / ||.||, Q_l = sum_j p_j f_j f_j^H + A_l R A_l^H + sigma^2 I,
///   b_j = Q_j^{-1} f~_j / ||.||, Q_j = sum_{i != j} p_i f_i f_i^H + A R A^H + sigma^2 I,
/// with g_l = G_l x_bar and x_bar = sum_k w_k + sum_l sqrt(tr S_l) v_1(S_l).
inline ReceiveBeamformers optimal_rx_beamformers(const DesignVariables& dv, const ChannelSet& ch, double noise_bs) {
  const Eigen::Index n = ch.num_tx();
  const Eigen::Index m = ch.num_rx();
  const CMat r = transmit_covariance(dv.S, dv.w, n);

  CVec x_bar = CVec::Zero(n);
  for (const auto& wk : dv.w) x_bar += wk;
  for (const auto& sl : dv.S) {
    const double tr = sl.trace().real();
    if (tr > 0.0) x_bar += std::sqrt(tr) * principal_eigenpair(sl).vector;
  }

  CMat uplink = CMat::Zero(m, m);
  for (std::size_t j = 0; j < ch.num_ul(); ++j) uplink.noalias() += dv.p[j] * ch.f[j] * ch.f[j].adjoint();
  const CMat noise = noise_bs * CMat::Identity(m, m);

  ReceiveBeamformers out;
  for (std::size_t l = 0; l < ch.num_targets(); ++l) {
    const CMat a = ch.interference_except(l);
    const CMat q = uplink + a * r * a.adjoint() + noise;
    CVec g = ch.g[l] * x_bar;
    const double scale = ch.g[l].norm() * std::max(x_bar.norm(), 1e-300);
    if (!(g.norm() > 1e-12 * scale)) {
      // x_bar orthogonal to the target's transmit response: use the echo's dominant direction.
      g = detail::dominant_direction(ch.g[l] * r * ch.g[l].adjoint());
      if (g.size() == 0) g = detail::dominant_direction(ch.g[l] * ch.g[l].adjoint());
      if (g.size() == 0) g = CVec::Ones(m);
    }
    out.u.push_back(detail::whitened_direction(q, g, "sensing"));
  }

  const CMat a_all = ch.interference_all();
  const CMat common = a_all * r * a_all.adjoint() + noise;
  for (std::size_t j = 0; j < ch.num_ul(); ++j) {
    const CMat q = common + uplink - dv.p[j] * ch.f[j] * ch.f[j].adjoint();
    CVec f = dv.p[j] > 0.0 ? CVec(std::sqrt(dv.p[j]) * ch.f[j]) : ch.f[j];
    if (f.norm() == 0.0) f = CVec::Ones(m);
    out.b.push_back(detail::whitened_direction(q, f, "uplink"));
  }
  return out;
}

/// Equal-power MRT toward each DL user, isotropic sensing covariances,
/// full UL power, and closed-form receive beamformers.
inline DesignVariables initial_design(const ChannelSet& ch, const Scenario& sc) {
  const Eigen::Index n = ch.num_tx();
  const std::size_t streams = ch.num_dl() + ch.num_targets();
  const double share = streams > 0 ? sc.p_dl_max / static_cast<double>(streams) : 0.0;
  DesignVariables dv;
  for (std::size_t k = 0; k < ch.num_dl(); ++k) {
    const double hn = ch.h[k].norm();
    dv.w.push_back(hn > 0.0 ? CVec(std::sqrt(share) * ch.h[k] / hn) : CVec(CVec::Zero(n)));
  }
  for (std::size_t l = 0; l < ch.num_targets(); ++l) {
    dv.S.push_back((share / static_cast<double>(n)) * CMat::Identity(n, n));
  }
  dv.p.assign(ch.num_ul(), sc.p_ul_max);
  dv.lift();
  auto rx = optimal_rx_beamformers(dv, ch, sc.noise_bs);
  dv.u = std::move(rx.u);
  dv.b = std::move(rx.b);
  return dv;
}

struct AoOptions {
  std::size_t max_iterations = 100;  // C~
  double tolerance = 1e-3;           // epsilon~, on WSR increase per iteration
  ScaOptions sca;
};

struct TraceEntry {
  std::size_t iteration = 0;
  double wsr = 0.0;
  double surrogate = 0.0;     // final surrogate value of the SCA call (initial row: wsr)
  std::size_t sca_rounds = 0;
  std::size_t ascent_steps = 0;
  double max_rank_residual = 0.0;
  double wall_ms = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceEntry> entries;
  bool converged = false;

  std::size_t iterations() const { return entries.empty() ? 0 : entries.size() - 1; }
  double final_wsr() const { return entries.empty() ? 0.0 : entries.back().wsr; }
};

struct AoResult {
  DesignVariables vars;
  OptimizationTrace trace;
  RateReport report;
  std::vector<double> rank_residuals;  // from the last SCA call
  double lifted_wsr = 0.0;             // lifted objective before rank-one extraction, last call
};

/// Alternates closed-form receive beamformers with SCA on the transmit
/// variables until the WSR gain per iteration falls below opt.tolerance.
/// Solver errors propagate; a SolverStalled error still carries its last iterate.
inline AoResult alternating_optimize(DesignVariables dv, const ChannelSet& ch, const Scenario& sc,
                                     const AoOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(clock::now() - t0).count(); };

  AoResult res;
  {
    auto rx = optimal_rx_beamformers(dv, ch, sc.noise_bs);
    dv.u = std::move(rx.u);
    dv.b = std::move(rx.b);
  }
  dv.lift();
  double prev = wsr(dv, ch, sc).wsr;
  res.trace.entries.push_back({0, prev, prev, 0, 0, 0.0, elapsed_ms()});

  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    auto rx = optimal_rx_beamformers(dv, ch, sc.noise_bs);
    dv.u = std::move(rx.u);
    dv.b = std::move(rx.b);
    dv.lift();
    ScaResult sca = solve_sca_subproblem(dv, ch, sc, opt.sca);
    dv = std::move(sca.vars);
    const double value = sca.vector_wsr;
    TraceEntry e;
    e.iteration = it;
    e.wsr = value;
    e.surrogate = sca.rounds.empty() ? value : sca.rounds.back().surrogate_after;
    e.sca_rounds = sca.rounds.size();
    e.ascent_steps = sca.ascent_steps;
    for (double r : sca.rank_residuals) e.max_rank_residual = std::max(e.max_rank_residual, r);
    e.wall_ms = elapsed_ms();
    res.trace.entries.push_back(e);
    res.rank_residuals = std::move(sca.rank_residuals);
    res.lifted_wsr = sca.lifted_wsr;
    const double gain = value - prev;
    prev = value;
    if (gain < opt.tolerance) {
      res.trace.converged = true;
      break;
    }
  }
  res.report = wsr(dv, ch, sc);
  res.vars = std::move(dv);
  return res;
}

}  // namespace maisac
