// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace maisac {
namespace {

using testing::desk_params;

TEST(Rayleigh, DirectFormula) {
  EXPECT_NEAR(rayleigh_distance(1.0, 0.01), 400.0, 1e-12);
  EXPECT_NEAR(rayleigh_distance(0.05, 0.01), 1.0, 1e-12);
}

TEST(Rayleigh, RejectsZeroAperture) {
  try {
    rayleigh_distance(0.0, 0.01);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
  }
}

TEST(Regions, CenteredAroundOriginWithGap) {
  const auto [tx, rx] = make_regions(1.0, 0.1);
  EXPECT_DOUBLE_EQ(tx.center.x, -0.55);
  EXPECT_DOUBLE_EQ(rx.center.x, 0.55);
  // Inner edges are exactly one gap apart.
  EXPECT_NEAR((rx.center.x - 0.5 * rx.side) - (tx.center.x + 0.5 * tx.side), 0.1, 1e-15);
}

TEST(SampleLayout, SingleAntennaPerArray) {
  const auto [tx, rx] = make_regions(0.01, 0.1);
  const AntennaLayout lay = sample_layout(tx, rx, 1, 1, 0.005, 3);
  ASSERT_EQ(lay.transmit.size(), 1u);
  ASSERT_EQ(lay.receive.size(), 1u);
  EXPECT_TRUE(layout_feasible(lay, tx, rx));
}

TEST(SampleLayout, SeedSevenRespectsSpacing) {
  const auto [tx, rx] = make_regions(1.0, 0.1);
  const AntennaLayout lay = sample_layout(tx, rx, 8, 8, 0.005, 7);
  EXPECT_GE(min_pairwise_distance(lay.transmit), 0.005);
  EXPECT_GE(min_pairwise_distance(lay.receive), 0.005);
  EXPECT_TRUE(layout_feasible(lay, tx, rx));
}

TEST(SampleLayout, PackingBoundIsInfeasible) {
  const auto [tx, rx] = make_regions(0.01, 0.1);
  try {
    sample_layout(tx, rx, 200, 200, 0.005, 1);
    FAIL() << "expected infeasible layout";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleLayout);
  }
}

TEST(SampleLayout, AttemptCapIsInfeasible) {
  // Packable by area but rejection sampling with a tiny budget gives up.
  const auto [tx, rx] = make_regions(0.05, 0.1);
  EXPECT_THROW(sample_layout(tx, rx, 40, 40, 0.005, 1, 50), Error);
}

TEST(SampleLayout, DeterministicInSeed) {
  const auto [tx, rx] = make_regions(1.0, 0.1);
  const AntennaLayout a = sample_layout(tx, rx, 6, 5, 0.005, 11);
  const AntennaLayout b = sample_layout(tx, rx, 6, 5, 0.005, 11);
  const AntennaLayout c = sample_layout(tx, rx, 6, 5, 0.005, 12);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.transmit[i].x, b.transmit[i].x);
    EXPECT_EQ(a.transmit[i].y, b.transmit[i].y);
  }
  EXPECT_NE(a.transmit[0].x, c.transmit[0].x);
}

TEST(SampleLayout, PropertyFeasibleOverSeeds) {
  const auto [tx, rx] = make_regions(0.1, 0.1);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const AntennaLayout lay = sample_layout(tx, rx, 8, 8, 0.005, seed);
    ASSERT_TRUE(layout_feasible(lay, tx, rx)) << "seed " << seed;
  }
}

TEST(GridShape, MostSquareFactorization) {
  EXPECT_EQ(grid_shape(4), (std::pair<std::size_t, std::size_t>{2, 2}));
  EXPECT_EQ(grid_shape(8), (std::pair<std::size_t, std::size_t>{2, 4}));
  EXPECT_EQ(grid_shape(128), (std::pair<std::size_t, std::size_t>{8, 16}));
  EXPECT_EQ(grid_shape(7), (std::pair<std::size_t, std::size_t>{1, 7}));
}

TEST(Fpaf, FourAntennasSpanTheRegionCorners) {
  const MovingRegion r{{0.0, 0.0, 0.0}, 1.0};
  const auto pts = fpaf_positions(r, 4);
  ASSERT_EQ(pts.size(), 4u);
  std::set<std::pair<double, double>> corners;
  for (const auto& p : pts) corners.insert({p.x, p.y});
  const std::set<std::pair<double, double>> want{{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}};
  EXPECT_EQ(corners, want);
}

TEST(Fpaf, NineAntennasHalfMeterPitch) {
  const MovingRegion r{{0.3, -0.2, 0.0}, 1.0};
  const auto pts = fpaf_positions(r, 9);
  ASSERT_EQ(pts.size(), 9u);
  EXPECT_NEAR(pts[1].x - pts[0].x, 0.5, 1e-15);
  EXPECT_NEAR(pts[3].y - pts[0].y, 0.5, 1e-15);
  EXPECT_NEAR(pts[4].x, 0.3, 1e-15);
  EXPECT_NEAR(pts[4].y, -0.2, 1e-15);
}

TEST(Fpah, FourAntennasHalfWavelengthPitch) {
  const auto pts = fpah_positions({0.0, 0.0, 0.0}, 0.01, 4);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_NEAR(pts[1].x - pts[0].x, 0.005, 1e-15);
  EXPECT_NEAR(pts[2].y - pts[0].y, 0.005, 1e-15);
  EXPECT_NEAR(pts[0].x + pts[3].x, 0.0, 1e-15);
}

TEST(Fpah, LayoutIndependentOfRegionSize) {
  const Scenario small = make_scenario(desk_params(4, 1, 1, 1, 5.0), 1);
  const Scenario large = make_scenario(desk_params(4, 1, 1, 1, 100.0), 1);
  const AntennaLayout a = fpah_layout(small, 8, 8);
  const AntennaLayout b = fpah_layout(large, 8, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(a.transmit[i].x, b.transmit[i].x, 1e-15);
    EXPECT_NEAR(a.receive[i].y, b.receive[i].y, 1e-15);
  }
  EXPECT_TRUE(layout_feasible(a, small.tx_region, small.rx_region));
  EXPECT_TRUE(layout_feasible(b, large.tx_region, large.rx_region));
}

TEST(Fpah, TooLargeForRegionIsInfeasible) {
  const Scenario sc = make_scenario(desk_params(4, 1, 1, 1, 1.0), 1);
  EXPECT_THROW(fpah_layout(sc, 16, 16), Error);
}

TEST(Scenario, NodesDrawnOnTheGroundRing) {
  const SceneParams p = desk_params(4, 2, 2, 2);
  const Scenario sc = make_scenario(p, 5);
  for (const auto* nodes : {&sc.targets, &sc.ul_users, &sc.dl_users}) {
    for (const auto& n : *nodes) {
      const double r = std::hypot(n.position.x, n.position.y);
      EXPECT_GE(r, p.ring_min);
      EXPECT_LE(r, p.ring_max);
      EXPECT_DOUBLE_EQ(n.position.z, -p.bs_height);
      EXPECT_GE(n.position.y, 0.0);
    }
  }
  EXPECT_NEAR(sc.weights.sum(), 1.0, 1e-15);
}

TEST(Scenario, NodesDoNotDependOnRegionSize) {
  const Scenario a = make_scenario(desk_params(4, 2, 2, 2, 5.0), 9);
  const Scenario b = make_scenario(desk_params(4, 2, 2, 2, 100.0), 9);
  EXPECT_EQ(a.targets[1].position.x, b.targets[1].position.x);
  EXPECT_EQ(a.dl_users[0].position.y, b.dl_users[0].position.y);
}

TEST(Units, ReferenceUnitConversions) {
  EXPECT_NEAR(db_to_amplitude(-100.0), 1e-5, 1e-20);
  EXPECT_NEAR(std::pow(db_to_amplitude(-100.0), 2), 1e-10, 1e-25);
  EXPECT_NEAR(dbm_to_watt(40.0), 10.0, 1e-12);
  EXPECT_NEAR(dbm_to_watt(10.0), 0.01, 1e-15);
  EXPECT_NEAR(dbm_to_watt(-70.0), 1e-10, 1e-24);
  EXPECT_NEAR(watt_to_dbm(dbm_to_watt(-17.5)), -17.5, 1e-12);
}

TEST(Seeds, DerivedStreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s) {
    for (std::uint64_t i = 0; i < 20; ++i) seen.insert(derive_seed(s, 0x1a70, i));
  }
  EXPECT_EQ(seen.size(), 400u);
}

}  // namespace
}  // namespace maisac
