// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/error.hpp"
#include "maisac/linalg.hpp"
#include "maisac/metrics.hpp"
#include "maisac/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace maisac {

struct ScaOptions {
  std::size_t max_rounds = 100;     // C
  double tolerance = 1e-3;          // epsilon, on surrogate improvement per round
  std::size_t max_ascent_steps = 2000;
  double initial_step = 1.0;        // first trial step of a round, in budget-normalized units
  double shrink = 0.5;
  double armijo_slope = 1e-4;
  std::size_t max_backtracks = 50;
  double pg_tolerance = 1e-6;       // projected-gradient norm, relative to the power budgets
  double ascent_floor = 1e-9;       // predicted gains below this (bits) are treated as rounding noise
  bool spectral_steps = true;       // Barzilai-Borwein trial steps after the first
  double rank_warning = 0.05;
};

/// Projects (S, W, p) onto C3a/C3b/C4: PSD blocks with total trace at most
/// p_dl_max, and 0 <= p_j <= p_ul_max. Exact Euclidean projection.
inline void project_transmit(DesignVariables& x, double p_dl_max, double p_ul_max) {
  std::vector<CMat> blocks;
  blocks.reserve(x.S.size() + x.W.size());
  for (auto& s : x.S) blocks.push_back(std::move(s));
  for (auto& w : x.W) blocks.push_back(std::move(w));
  project_psd_budget(blocks, p_dl_max);
  for (std::size_t l = 0; l < x.S.size(); ++l) x.S[l] = std::move(blocks[l]);
  for (std::size_t k = 0; k < x.W.size(); ++k) x.W[k] = std::move(blocks[x.S.size() + k]);
  for (auto& pj : x.p) pj = std::clamp(pj, 0.0, p_ul_max);
}

inline bool transmit_feasible(const DesignVariables& x, double p_dl_max, double p_ul_max, double tol = 1e-9) {
  for (const auto& s : x.S) {
    if (min_eigenvalue(s) < -tol * p_dl_max) return false;
  }
  for (const auto& w : x.W) {
    if (min_eigenvalue(w) < -tol * p_dl_max) return false;
  }
  if (x.dl_power_lifted() > p_dl_max * (1.0 + tol)) return false;
  return std::all_of(x.p.begin(), x.p.end(), [&](double v) { return v >= 0.0 && v <= p_ul_max * (1.0 + tol); });
}

struct RankOneResult {
  CVec w;
  double residual = 0.0;  // ||W - w w^H||_F / ||W||_F
};

/// Principal-eigenpair rank-one extraction: w = sqrt(lambda_1) v_1.
inline RankOneResult extract_rank1(const CMat& w_lifted) {
  const double norm = w_lifted.norm();
  if (norm == 0.0) return {CVec::Zero(w_lifted.rows()), 0.0};
  const EigenPair ep = principal_eigenpair(w_lifted);
  RankOneResult out;
  out.w = std::sqrt(std::max(ep.value, 0.0)) * ep.vector;
  out.residual = (w_lifted - out.w * out.w.adjoint()).norm() / norm;
  return out;
}

/// Numerically stalled line search; carries the last feasible iterate.
class SolverStalled : public Error {
 public:
  SolverStalled(const std::string& what, DesignVariables last)
      : Error(ErrorKind::kSolverStalled, std::string(to_string(ErrorKind::kSolverStalled)) + ": " + what),
        last_iterate(std::move(last)) {}
  DesignVariables last_iterate;
};

struct AscentStats {
  std::size_t steps = 0;
  std::size_t evaluations = 0;
  double final_pg_norm = 0.0;
  double value = 0.0;
};

namespace detail {

/// The concave round objective alpha(x) - beta_hat(x | anchor) with the
/// linearized part folded into one constant gradient.
class RoundObjective {
 public:
  RoundObjective(const SurrogateExpansion& ex, double p_dl_max, double p_ul_max)
      : ex_(ex), p_dl_(p_dl_max), p_ul_(p_ul_max) {
    beta_grad_ = ex.model.zero_gradient();
    for (const auto& g : ex.beta_grad) {
      for (std::size_t l = 0; l < g.S.size(); ++l) beta_grad_.S[l] += g.S[l];
      for (std::size_t k = 0; k < g.W.size(); ++k) beta_grad_.W[k] += g.W[k];
      beta_grad_.p += g.p;
    }
    beta_anchor_ = ex.beta_at_anchor[0] + ex.beta_at_anchor[1] + ex.beta_at_anchor[2];
    for (const auto& group : ex.model.alpha) {
      for (const auto& t : group) {
        if (t.weight != 0.0) alpha_.push_back(&t);
      }
    }
  }

  double value(const DesignVariables& x, std::vector<double>* affine_out = nullptr) const {
    const CMat s_sum = sum_s(x);
    double v = 0.0;
    if (affine_out) affine_out->clear();
    for (const auto* t : alpha_) {
      const double a = affine(*t, s_sum, x);
      if (affine_out) affine_out->push_back(a);
      v += t->weight * std::log2(a);
    }
    double lin = beta_anchor_;
    for (std::size_t l = 0; l < x.S.size(); ++l) lin += inner(beta_grad_.S[l], x.S[l] - ex_.anchor.S[l]);
    for (std::size_t k = 0; k < x.W.size(); ++k) lin += inner(beta_grad_.W[k], x.W[k] - ex_.anchor.W[k]);
    for (std::size_t j = 0; j < x.p.size(); ++j) lin += beta_grad_.p(static_cast<Eigen::Index>(j)) * (x.p[j] - ex_.anchor.p[j]);
    return v - lin;
  }

  BlockGradient gradient(const DesignVariables& x, const std::vector<double>& affine_values) const {
    BlockGradient g = ex_.model.zero_gradient();
    for (std::size_t i = 0; i < alpha_.size(); ++i) g.add_log_term(*alpha_[i], affine_values[i], 1.0);
    for (std::size_t l = 0; l < g.S.size(); ++l) g.S[l] -= beta_grad_.S[l];
    for (std::size_t k = 0; k < g.W.size(); ++k) g.W[k] -= beta_grad_.W[k];
    g.p -= beta_grad_.p;
    (void)x;
    return g;
  }

  /// Largest step along the unprojected scaled gradient that changes no
  /// alpha affine term by more than half. Terms near the noise floor make
  /// the round objective curved on that scale, far beyond what plain
  /// backtracking from a spectral step can reach.
  double safe_step(const DesignVariables& x, const BlockGradient& g) const {
    const CMat gs = sum_s_grad(g);
    const CMat s_sum = sum_s(x);
    double cap = std::numeric_limits<double>::infinity();
    for (const auto* t : alpha_) {
      double rate = 0.0;
      if (gs.size() > 0) rate += p_dl_ * p_dl_ * trace_product(gs, t->coef);
      for (std::size_t k = 0; k < g.W.size(); ++k) {
        if (t->w_mask[k]) rate += p_dl_ * p_dl_ * trace_product(hermitian_part(g.W[k]), t->coef);
      }
      for (Eigen::Index j = 0; j < t->p_coef.size(); ++j) rate += p_ul_ * p_ul_ * g.p(j) * t->p_coef(j);
      if (rate != 0.0) cap = std::min(cap, 0.5 * affine(*t, s_sum, x) / std::abs(rate));
    }
    return cap;
  }

  double p_dl() const { return p_dl_; }
  double p_ul() const { return p_ul_; }

 private:
  static CMat sum_s(const DesignVariables& x) {
    if (x.S.empty()) return {};
    CMat s = x.S[0];
    for (std::size_t l = 1; l < x.S.size(); ++l) s += x.S[l];
    return s;
  }

  static CMat sum_s_grad(const BlockGradient& g) {
    if (g.S.empty()) return {};
    CMat s = hermitian_part(g.S[0]);
    for (std::size_t l = 1; l < g.S.size(); ++l) s += hermitian_part(g.S[l]);
    return s;
  }

  static double affine(const LogAffineTerm& t, const CMat& s_sum, const DesignVariables& x) {
    double a = t.constant;
    if (s_sum.size() > 0) a += trace_product(s_sum, t.coef);
    for (std::size_t k = 0; k < x.W.size(); ++k) {
      if (t.w_mask[k]) a += trace_product(x.W[k], t.coef);
    }
    for (Eigen::Index j = 0; j < t.p_coef.size(); ++j) a += x.p[static_cast<std::size_t>(j)] * t.p_coef(j);
    return a;
  }

  const SurrogateExpansion& ex_;
  double p_dl_, p_ul_;
  BlockGradient beta_grad_;
  double beta_anchor_ = 0.0;
  std::vector<const LogAffineTerm*> alpha_;
};

/// x + step * D g, where D scales blocks by p_dl^2 and powers by p_ul^2
/// (plain gradient steps in budget-normalized coordinates).
inline DesignVariables scaled_step(const DesignVariables& x, const BlockGradient& g, double step, double p_dl,
                                   double p_ul) {
  DesignVariables y;
  y.S.resize(x.S.size());
  y.W.resize(x.W.size());
  y.p.resize(x.p.size());
  const double sb = step * p_dl * p_dl;
  const double sp = step * p_ul * p_ul;
  for (std::size_t l = 0; l < x.S.size(); ++l) y.S[l] = x.S[l] + sb * g.S[l];
  for (std::size_t k = 0; k < x.W.size(); ++k) y.W[k] = x.W[k] + sb * g.W[k];
  for (std::size_t j = 0; j < x.p.size(); ++j) y.p[j] = x.p[j] + sp * g.p(static_cast<Eigen::Index>(j));
  return y;
}

/// Norm of the scaled gradient D g in budget-normalized coordinates.
inline double scaled_norm(const BlockGradient& g, double p_dl, double p_ul) {
  double b = 0.0;
  for (const auto& m : g.S) b += m.squaredNorm();
  for (const auto& m : g.W) b += m.squaredNorm();
  return std::sqrt(p_dl * p_dl * b + p_ul * p_ul * g.p.squaredNorm());
}

/// Upper bound on a trial displacement in budget-normalized units. The
/// feasible set has diameter 2 there; far longer steps only feed rounding
/// error into the projection's eigenvalue shift.
inline constexpr double kMaxDisplacement = 1e3;

/// Squared distance between two iterates in budget-normalized coordinates.
inline double scaled_dist2(const DesignVariables& a, const DesignVariables& b, double p_dl, double p_ul) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.S.size(); ++l) d += (a.S[l] - b.S[l]).squaredNorm();
  for (std::size_t k = 0; k < a.W.size(); ++k) d += (a.W[k] - b.W[k]).squaredNorm();
  d /= p_dl * p_dl;
  for (std::size_t j = 0; j < a.p.size(); ++j) d += (a.p[j] - b.p[j]) * (a.p[j] - b.p[j]) / (p_ul * p_ul);
  return d;
}

inline DesignVariables difference(const DesignVariables& a, const DesignVariables& b) {
  DesignVariables d;
  d.S.resize(a.S.size());
  d.W.resize(a.W.size());
  d.p.resize(a.p.size());
  for (std::size_t l = 0; l < a.S.size(); ++l) d.S[l] = a.S[l] - b.S[l];
  for (std::size_t k = 0; k < a.W.size(); ++k) d.W[k] = a.W[k] - b.W[k];
  for (std::size_t j = 0; j < a.p.size(); ++j) d.p[j] = a.p[j] - b.p[j];
  return d;
}

}  // namespace detail

/// Maximizes the concave surrogate of `ex` over the feasible set by
/// projected gradient ascent with Armijo backtracking along the projection arc.
/// Starts at `start`, which is projected first; the result is never worse than the start.
inline DesignVariables maximize_surrogate(const SurrogateExpansion& ex, DesignVariables start, const Scenario& sc,
                                          const ScaOptions& opt, AscentStats* stats = nullptr) {
  const double pd = sc.p_dl_max;
  const double pu = sc.p_ul_max;
  detail::RoundObjective obj(ex, pd, pu);
  DesignVariables keep;
  keep.u = std::move(start.u);
  keep.b = std::move(start.b);
  keep.w = std::move(start.w);
  DesignVariables x = std::move(start);
  project_transmit(x, pd, pu);

  std::vector<double> aff;
  double fx = obj.value(x, &aff);
  BlockGradient g = obj.gradient(x, aff);
  double step = opt.initial_step;
  AscentStats st;
  st.evaluations = 1;

  for (std::size_t it = 0; it < opt.max_ascent_steps; ++it) {
    DesignVariables unit = detail::scaled_step(x, g, 1.0, pd, pu);
    project_transmit(unit, pd, pu);
    st.final_pg_norm = std::sqrt(detail::scaled_dist2(unit, x, pd, pu));
    if (st.final_pg_norm < opt.pg_tolerance) break;

    bool accepted = false;
    const double gnorm = detail::scaled_norm(g, pd, pu);
    if (gnorm > 0.0) step = std::min(step, detail::kMaxDisplacement / gnorm);
    double t = step;
    DesignVariables trial;
    double ft = 0.0;
    double last_predicted = 0.0;
    // Second pass restarts from the curvature-safe step when plain backtracking fails.
    for (int pass = 0; pass < 2 && !accepted; ++pass) {
      if (pass == 1) {
        const double safe = obj.safe_step(x, g);
        if (!(safe < step)) break;
        t = safe;
      }
      for (std::size_t bt = 0; bt < opt.max_backtracks; ++bt) {
        trial = detail::scaled_step(x, g, t, pd, pu);
        project_transmit(trial, pd, pu);
        const double predicted = g.directional(detail::difference(trial, x));
        last_predicted = predicted;
        ft = obj.value(trial, &aff);
        ++st.evaluations;
        if (ft >= fx + opt.armijo_slope * predicted) {
          accepted = true;
          break;
        }
        t *= opt.shrink;
      }
    }
    if (!accepted) {
      // Ascent predicted at the smallest trial is below the objective's
      // rounding noise: numerically stationary. Anything else means the
      // model and its gradient disagree.
      if (std::isfinite(fx) && last_predicted <= std::max(opt.ascent_floor, 1e-12 * std::abs(fx))) break;
      x.u = keep.u;
      x.b = keep.b;
      throw SolverStalled("line search failed " + std::to_string(opt.max_backtracks) + " consecutive times", x);
    }

    BlockGradient g_new = obj.gradient(trial, aff);
    if (opt.spectral_steps) {
      // Barzilai-Borwein step in normalized coordinates; concavity makes <s, y> <= 0.
      const DesignVariables s = detail::difference(trial, x);
      BlockGradient y = g_new;
      for (std::size_t l = 0; l < y.S.size(); ++l) y.S[l] -= g.S[l];
      for (std::size_t k = 0; k < y.W.size(); ++k) y.W[k] -= g.W[k];
      y.p -= g.p;
      const double sy = y.directional(s);
      const double ss = detail::scaled_dist2(trial, x, pd, pu);
      step = sy < 0.0 ? std::clamp(ss / -sy, 1e-20, 1e20) : std::min(t * 4.0, 1e20);
    } else {
      step = opt.initial_step;
    }
    x = std::move(trial);
    fx = ft;
    g = std::move(g_new);
    ++st.steps;
  }
  st.value = fx;
  if (stats) *stats = st;
  x.u = std::move(keep.u);
  x.b = std::move(keep.b);
  x.w = std::move(keep.w);
  return x;
}

struct ScaRound {
  double lifted_wsr_before = 0.0;  // equals surrogate at the anchor
  double surrogate_after = 0.0;
  double lifted_wsr_after = 0.0;
  std::size_t ascent_steps = 0;
};

struct ScaResult {
  DesignVariables vars;             // S, w, W (= lifted solution), p; u and b untouched
  std::vector<ScaRound> rounds;
  std::vector<double> rank_residuals;  // per k, principal-eigenpair residual of the lifted W_k
  double lifted_wsr = 0.0;
  double vector_wsr = 0.0;
  bool used_covariance_transfer = false;
  std::size_t ascent_steps = 0;
};

/// Rank-one DL beamformers from lifted W_k that keep R and every
/// h_k^H W_k h_k unchanged: w_k = W_k h_k / sqrt(h_k^H W_k h_k), with
/// W_k - w_k w_k^H (PSD) moved into the first sensing covariance. With no
/// targets the remainder is dropped, which only removes interference.
inline DesignVariables transfer_rank1(const DesignVariables& lifted, const ChannelSet& ch) {
  DesignVariables out = lifted;
  const Eigen::Index n = ch.num_tx();
  CMat moved = CMat::Zero(n, n);
  for (std::size_t k = 0; k < lifted.W.size(); ++k) {
    const CVec wh = lifted.W[k] * ch.h[k];
    const double gain = ch.h[k].dot(wh).real();
    out.w[k] = gain > 0.0 ? CVec(wh / std::sqrt(gain)) : CVec(CVec::Zero(n));
    CMat rest = hermitian_part(lifted.W[k] - out.w[k] * out.w[k].adjoint());
    // Clip rounding-level negative eigenvalues of the remainder.
    Eigen::SelfAdjointEigenSolver<CMat> es(rest);
    rest = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
    moved += rest;
  }
  if (!out.S.empty()) out.S[0] += moved;
  out.lift();
  return out;
}

/// Successive convex approximation for the transmit variables with the
/// receive beamformers in `anchor` held fixed. Each round maximizes the
/// surrogate built at the previous iterate; rounds stop when the surrogate
/// improves by less than opt.tolerance or after opt.max_rounds.
inline ScaResult solve_sca_subproblem(const DesignVariables& anchor, const ChannelSet& ch, const Scenario& sc,
                                      const ScaOptions& opt = {}) {
  ScaResult res;
  DesignVariables x = anchor;
  if (x.W.size() != x.w.size()) x.lift();
  project_transmit(x, sc.p_dl_max, sc.p_ul_max);

  for (std::size_t c = 0; c < opt.max_rounds; ++c) {
    const SurrogateExpansion ex = surrogate_gradients(x, ch, sc);
    ScaRound round;
    round.lifted_wsr_before = ex.model.wsr(x);
    AscentStats st;
    DesignVariables next = maximize_surrogate(ex, x, sc, opt, &st);
    round.surrogate_after = st.value;
    round.ascent_steps = st.steps;
    res.ascent_steps += st.steps;
    const double improvement = st.value - round.lifted_wsr_before;
    // Minorize-maximize: a round never lowers the surrogate below its anchor value.
    if (improvement < 0.0) next = x;
    round.lifted_wsr_after = ex.model.wsr(next);
    res.rounds.push_back(round);
    x = std::move(next);
    if (improvement < opt.tolerance) break;
  }

  const LogTermModel final_model = build_log_terms(x, ch, sc);
  res.lifted_wsr = final_model.wsr(x);

  DesignVariables eig = x;
  eig.w.resize(x.W.size());
  res.rank_residuals.clear();
  for (std::size_t k = 0; k < x.W.size(); ++k) {
    RankOneResult r1 = extract_rank1(x.W[k]);
    eig.w[k] = std::move(r1.w);
    res.rank_residuals.push_back(r1.residual);
  }
  eig.lift();
  DesignVariables transfer = transfer_rank1(x, ch);
  const double wsr_eig = wsr(eig, ch, sc).wsr;
  const double wsr_transfer = wsr(transfer, ch, sc).wsr;
  if (wsr_transfer > wsr_eig) {
    res.vars = std::move(transfer);
    res.vector_wsr = wsr_transfer;
    res.used_covariance_transfer = true;
  } else {
    res.vars = std::move(eig);
    res.vector_wsr = wsr_eig;
  }
  return res;
}

}  // namespace maisac
