// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <gtest/gtest.h>

namespace maisac {
namespace {

using testing::desk_params;
using testing::random_instance;

TEST(Covariance, SingleBeamformer) {
  const double p = 3.0;
  std::vector<CVec> w{CVec::Unit(3, 0) * std::sqrt(p)};
  const CMat r = transmit_covariance({}, w, 3);
  CMat want = CMat::Zero(3, 3);
  want(0, 0) = p;
  EXPECT_NEAR((r - want).norm(), 0.0, 1e-15);
}

TEST(Covariance, ScaledIdentityCovariance) {
  std::vector<CMat> s{0.7 * CMat::Identity(4, 4)};
  EXPECT_NEAR((transmit_covariance(s, {}, 4) - 0.7 * CMat::Identity(4, 4)).norm(), 0.0, 1e-15);
}

TEST(Covariance, PropertyPsdClosure) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CMat> s{testing::random_psd(rng, 5, 2.0), testing::random_psd(rng, 5, 0.1)};
    std::vector<CVec> w{rng.complex_normal_vector(5), rng.complex_normal_vector(5)};
    const CMat r = transmit_covariance(s, w, 5);
    EXPECT_GE(min_eigenvalue(r), -1e-10 * r.trace().real());
  }
}

// Rank-one sensing with matched receive filter: gamma = P rho^2 M N / sigma^2.
TEST(SensingSinr, MatchedRankOneClosedForm) {
  SceneParams p = desk_params(5, 1, 0, 0);
  p.num_rx = 3;
  p.si_coeff = 0.0;
  const testing::Instance in = random_instance(p, 2);
  const double power = in.sc.p_dl_max;
  const CVec v = in.ch.g_t[0] / std::sqrt(5.0);
  DesignVariables dv;
  dv.S = {power * v * v.adjoint()};
  const CVec gv = in.ch.g[0] * v;
  dv.u = {gv / gv.norm()};
  const double rho = in.sc.targets[0].coeff;
  const double want = power * rho * rho * 3.0 * 5.0 / in.sc.noise_bs;
  EXPECT_NEAR(sensing_sinr(0, dv, in.ch, in.sc.noise_bs) / want, 1.0, 1e-12);
}

TEST(SensingSinr, ZeroCovarianceAndNoiseScaling) {
  SceneParams p = desk_params(4, 1, 0, 0);
  p.si_coeff = 0.0;
  const testing::Instance in = random_instance(p, 3);
  Rng rng(9);
  DesignVariables dv;
  dv.u = {rng.unit_vector(4)};
  dv.S = {CMat::Zero(4, 4)};
  EXPECT_EQ(sensing_sinr(0, dv, in.ch, in.sc.noise_bs), 0.0);
  dv.S = {testing::random_psd(rng, 4, 1.0)};
  const double g1 = sensing_sinr(0, dv, in.ch, in.sc.noise_bs);
  const double g10 = sensing_sinr(0, dv, in.ch, 10.0 * in.sc.noise_bs);
  EXPECT_NEAR(g1 / g10, 10.0, 1e-10);
}

TEST(UplinkSinr, MatchedFilterClosedForm) {
  SceneParams p = desk_params(4, 0, 1, 0);
  p.num_rx = 6;
  p.si_coeff = 0.0;
  const testing::Instance in = random_instance(p, 4);
  DesignVariables dv;
  dv.p = {0.004};
  dv.b = {in.ch.f[0] / in.ch.f[0].norm()};
  const double rho = in.sc.ul_users[0].coeff;
  const double want = 0.004 * rho * rho * 6.0 / in.sc.noise_bs;
  EXPECT_NEAR(ul_sinr(0, dv, in.ch, in.sc.noise_bs) / want, 1.0, 1e-12);
  dv.p = {0.0};
  EXPECT_EQ(ul_sinr(0, dv, in.ch, in.sc.noise_bs), 0.0);
}

TEST(UplinkSinr, ExtraUserNeverHelps) {
  const testing::Instance in = random_instance(desk_params(4, 1, 2, 1), 5);
  Rng rng(2);
  DesignVariables dv = testing::random_design(rng, in.ch, in.sc);
  dv.p[1] = 0.0;
  const double alone = ul_sinr(0, dv, in.ch, in.sc.noise_bs);
  for (double p1 : {1e-4, 1e-3, 1e-2}) {
    dv.p[1] = p1;
    EXPECT_LE(ul_sinr(0, dv, in.ch, in.sc.noise_bs), alone);
  }
}

TEST(DownlinkSinr, MrtClosedForm) {
  const testing::Instance in = random_instance(desk_params(6, 0, 0, 1), 6);
  const double power = in.sc.p_dl_max;
  DesignVariables dv;
  dv.w = {std::sqrt(power) * in.ch.h[0] / in.ch.h[0].norm()};
  const double rho = in.sc.dl_users[0].coeff;
  const double want = power * rho * rho * 6.0 / in.sc.noise_dl[0];
  EXPECT_NEAR(dl_sinr(0, dv, in.ch, in.sc.noise_dl[0]) / want, 1.0, 1e-12);
  dv.w = {CVec::Zero(6)};
  EXPECT_EQ(dl_sinr(0, dv, in.ch, in.sc.noise_dl[0]), 0.0);
}

TEST(DownlinkSinr, SensingPowerOnlyAddsInterference) {
  const testing::Instance in = random_instance(desk_params(4, 1, 0, 1), 7);
  Rng rng(3);
  DesignVariables dv;
  dv.w = {rng.complex_normal_vector(4)};
  dv.S = {CMat::Zero(4, 4)};
  double prev = dl_sinr(0, dv, in.ch, in.sc.noise_dl[0]);
  const CMat step = testing::random_psd(rng, 4, 1.0);
  for (int i = 0; i < 5; ++i) {
    dv.S[0] += step;
    const double now = dl_sinr(0, dv, in.ch, in.sc.noise_dl[0]);
    EXPECT_LE(now, prev);
    prev = now;
  }
}

TEST(Wsr, ZeroPowerGivesZero) {
  const testing::Instance in = random_instance(desk_params(4, 2, 2, 2), 8);
  Rng rng(4);
  DesignVariables dv = testing::random_design(rng, in.ch, in.sc);
  for (auto& s : dv.S) s.setZero();
  for (auto& w : dv.w) w.setZero();
  for (auto& p : dv.p) p = 0.0;
  const RateReport r = wsr(dv, in.ch, in.sc);
  EXPECT_EQ(r.wsr, 0.0);
  for (double v : r.rate_s) EXPECT_EQ(v, 0.0);
}

TEST(Wsr, DegenerateWeightsSelectFirstSensingRate) {
  testing::Instance in = random_instance(desk_params(4, 2, 2, 2), 9);
  in.sc.weights = {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  Rng rng(5);
  const DesignVariables dv = testing::random_design(rng, in.ch, in.sc);
  const RateReport r = wsr(dv, in.ch, in.sc);
  EXPECT_DOUBLE_EQ(r.wsr, r.rate_s[0]);
}

TEST(Wsr, LiftedEqualsVectorForRankOne) {
  const testing::Instance in = random_instance(desk_params(4, 2, 2, 2), 10);
  Rng rng(6);
  const DesignVariables dv = testing::random_design(rng, in.ch, in.sc);
  EXPECT_NEAR(wsr(dv, in.ch, in.sc).wsr, wsr_lifted(dv, in.ch, in.sc).wsr, 1e-10);
}

TEST(Wsr, OptimizedBeatsRandomBeamformers) {
  const SceneParams p = desk_params(8, 2, 2, 2);
  const testing::Instance in = random_instance(p, 11);
  Rng rng(7);
  const DesignVariables random_point = testing::random_design(rng, in.ch, in.sc);
  const AoResult opt = alternating_optimize(initial_design(in.ch, in.sc), in.ch, in.sc);
  EXPECT_GT(opt.report.wsr, wsr(random_point, in.ch, in.sc).wsr);
}

}  // namespace
}  // namespace maisac
