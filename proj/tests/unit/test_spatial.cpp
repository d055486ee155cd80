#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "kbte/diagnostics.hpp"
#include "kbte/errors.hpp"
#include "kbte/phase_space.hpp"

using namespace kbte;

namespace {

const double kPi = std::numbers::pi;

std::shared_ptr<const PhaseSpace> make_space(int nx, double R, int nv,
                                             PotentialSpec pot = PotentialSpec{}) {
  const auto dom = LevelSetDomain::ball();
  return std::make_shared<PhaseSpace>(dom, PotentialField(pot, dom), SpatialGrid(dom, nx),
                                      VelocityGrid(R, nv), WeightSpec(6.0));
}

}  // namespace

TEST(SpatialGrid, NodesAreInteriorAndCellCentred) {
  const auto dom = LevelSetDomain::ball();
  const SpatialGrid g(dom, 8);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LT(dom.level(g.node(i)), 0.0);
    const auto& c = g.coords(i);
    EXPECT_EQ(g.lookup(c[0], c[1], c[2]), static_cast<int>(i));
  }
  EXPECT_EQ(g.lookup(0, 0, 0), -1);
  EXPECT_EQ(g.lookup(-1, 3, 3), -1);
}

TEST(SpatialGrid, VolumeConvergesToBall) {
  const auto dom = LevelSetDomain::ball();
  const double exact = 4.0 * kPi / 3.0;
  EXPECT_NEAR(SpatialGrid(dom, 16).volume() / exact, 1.0, 0.02);
  EXPECT_NEAR(SpatialGrid(dom, 24).volume() / exact, 1.0, 0.01);
}

TEST(SpatialGrid, StencilReproducesLinearFunctions) {
  const auto dom = LevelSetDomain::ball();
  const SpatialGrid g(dom, 12);
  auto f = [](const Vec3& x) { return 0.3 + 1.5 * x.x() - 0.7 * x.y() + 2.0 * x.z(); };
  std::array<int, 8> idx;
  std::array<double, 8> w;
  for (const Vec3& p : {Vec3(0.1, -0.2, 0.05), Vec3(-0.33, 0.21, 0.4), Vec3(0.0, 0.0, 0.0)}) {
    const int n = g.stencil(p, idx, w);
    ASSERT_EQ(n, 8);
    double s = 0.0, wsum = 0.0;
    for (int k = 0; k < n; ++k) {
      s += w[k] * f(g.node(idx[k]));
      wsum += w[k];
    }
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    EXPECT_NEAR(s, f(p), 1e-13);
  }
}

TEST(SpatialGrid, MaskedStencilIsConvexNearTheWall) {
  const auto dom = LevelSetDomain::ball();
  const SpatialGrid g(dom, 8);
  std::array<int, 8> idx;
  std::array<double, 8> w;
  const int n = g.stencil(Vec3(0.97, 0.0, 0.1), idx, w);
  ASSERT_GT(n, 0);
  double wsum = 0.0;
  for (int k = 0; k < n; ++k) {
    EXPECT_GE(w[k], 0.0);
    EXPECT_GE(idx[k], 0);
    wsum += w[k];
  }
  EXPECT_NEAR(wsum, 1.0, 1e-14);
}

TEST(SpatialGrid, CubicStencilReproducesCubics) {
  const auto dom = LevelSetDomain::ball();
  const SpatialGrid g(dom, 16);
  auto f = [](const Vec3& x) {
    return 1.0 + x.x() * x.x() * x.x() - 2.0 * x.x() * x.y() * x.z() + x.z() * x.z();
  };
  std::array<int, 64> idx;
  std::array<double, 64> w;
  const Vec3 p(0.07, -0.11, 0.13);
  ASSERT_EQ(g.cubic_stencil(p, idx, w), 64);
  double s = 0.0;
  for (int k = 0; k < 64; ++k) s += w[k] * f(g.node(idx[k]));
  EXPECT_NEAR(s, f(p), 1e-12);
  EXPECT_EQ(g.cubic_stencil(Vec3(0.95, 0.0, 0.0), idx, w), 0);
}

TEST(SpatialGrid, StationsLieOnTheBoundary) {
  const auto dom = LevelSetDomain::ball();
  const SpatialGrid g(dom, 12);
  ASSERT_FALSE(g.stations().empty());
  double area = 0.0;
  for (const auto& s : g.stations()) {
    EXPECT_NEAR(s.x.norm(), 1.0, 1e-8);
    EXPECT_NEAR(s.n.norm(), 1.0, 1e-12);
    EXPECT_GT(s.n.dot(s.x), 0.99);
    area += s.area;
  }
  EXPECT_NEAR(area / (4.0 * kPi), 1.0, 0.02);
  const std::size_t k = g.nearest_station(Vec3(0.0, 0.0, 1.0));
  EXPECT_GT(g.stations()[k].x.z(), 0.9);
}

TEST(PhaseSpace, EquilibriumMassMatchesProductOracle) {
  const auto s = make_space(16, 8.0, 24);
  // Exact ball volume times the Gaussian integral.
  const double oracle = 4.0 * kPi / 3.0 * std::pow(2.0 * kPi, 1.5);
  EXPECT_NEAR(oracle, 65.97, 0.01);
  const auto eq = DistributionField::equilibrium(s);
  EXPECT_NEAR(total_mass(eq) / oracle, 1.0, 0.02);
  EXPECT_NEAR(total_mass(eq) / s->equilibrium_mass(), 1.0, 1e-10);
}

TEST(PhaseSpace, RepresentationsRoundTrip) {
  const auto s = make_space(6, 4.0, 8, PotentialSpec{PotentialKind::Harmonic});
  const auto h = random_perturbation(s, 0.3, 11);
  EXPECT_EQ(h.rep, Representation::WeightedPerturbation);
  double sup = 0.0;
  for (double x : h.values) sup = std::max(sup, std::abs(x));
  EXPECT_NEAR(sup, 0.3, 1e-14);
  const auto back = h.as(Representation::Full).as(Representation::WeightedPerturbation);
  for (std::size_t k = 0; k < h.values.size(); ++k) EXPECT_NEAR(back.values[k], h.values[k], 1e-10);
  // Perturbations carry no mass.
  EXPECT_NEAR(total_mass(h) / s->equilibrium_mass(), 1.0, 1e-13);
}

TEST(PhaseSpace, InitialDataKeepTheEquilibriumMass) {
  const auto s = make_space(6, 4.0, 8);
  const double m = s->equilibrium_mass();
  EXPECT_NEAR(total_mass(smooth_perturbation(s, 0.5)) / m, 1.0, 1e-12);
  EXPECT_NEAR(total_mass(bump_initial(s, 5.0, Vec3::Zero(), 0.05)) / m, 1.0, 1e-12);
  const auto F = random_nonnegative(s, 4);
  EXPECT_NEAR(total_mass(F) / m, 1.0, 1e-12);
  for (double x : F.values) EXPECT_GE(x, 0.0);
}

TEST(PhaseSpace, SubGridBumpSitsOnTheNearestNode) {
  const auto s = make_space(6, 4.0, 8);
  const auto F = bump_initial(s, 5.0, Vec3(0.1, 0.1, 0.1), 0.05);
  const auto h = F.as(Representation::WeightedPerturbation).values;
  const std::size_t centre = s->x_grid().nearest(Vec3(0.1, 0.1, 0.1));
  const std::size_t other = (centre + 1) % s->nx();
  // h = w f carries the profile at every velocity, up to the mass fix.
  EXPECT_NEAR(h[s->index(0, centre)] - h[s->index(0, other)], 5.0, 0.1);
  EXPECT_THROW(bump_initial(s, 5.0, Vec3::Zero(), 0.0), ValidationError);
}

TEST(PhaseSpace, RandomPerturbationIsSeeded) {
  const auto s = make_space(6, 4.0, 8);
  EXPECT_EQ(random_perturbation(s, 1.0, 3).values, random_perturbation(s, 1.0, 3).values);
  EXPECT_NE(random_perturbation(s, 1.0, 3).values, random_perturbation(s, 1.0, 4).values);
}
