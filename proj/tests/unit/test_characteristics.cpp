#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kbte/characteristics.hpp"
#include "kbte/errors.hpp"

using namespace kbte;

namespace {

const LevelSetDomain kBall = LevelSetDomain::ball();
const PotentialField kZero = PotentialField::zero(kBall);

PotentialField harmonic() {
  PotentialSpec s;
  s.kind = PotentialKind::Harmonic;
  return PotentialField(s, kBall, 32);
}

}  // namespace

TEST(Flow, FreeFlight) {
  const PhasePoint p = flow(kZero, {Vec3::Zero(), Vec3(1, 0, 0)}, 1.0, 0.0, 1e-3);
  EXPECT_LT((p.x - Vec3(-1, 0, 0)).norm(), 1e-12);
  EXPECT_LT((p.v - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(Flow, HarmonicQuarterPeriod) {
  const auto pot = harmonic();
  const double t = 0.7;
  const PhasePoint p =
      flow(pot, {Vec3(0.5, 0, 0), Vec3(0, 0.5, 0)}, t, t - std::numbers::pi / 2, 1e-3);
  EXPECT_LT((p.x - Vec3(0, -0.5, 0)).norm(), 1e-6);
  EXPECT_LT((p.v - Vec3(0.5, 0, 0)).norm(), 1e-6);
}

TEST(Flow, HarmonicEnergyOverPeriod) {
  const auto pot = harmonic();
  const PhasePoint start{Vec3(0.5, 0.1, 0), Vec3(0, 0.5, 0.2)};
  const PhasePoint p = flow(pot, start, 0.0, -2 * std::numbers::pi, 1e-3);
  EXPECT_LE(std::abs(hamiltonian(pot, p.x, p.v) - hamiltonian(pot, start.x, start.v)), 1e-8);
}

TEST(Flow, EnergyErrorIsSecondOrder) {
  const auto pot = harmonic();
  const PhasePoint start{Vec3(0.3, 0.2, -0.4), Vec3(1.0, 0.5, 0.2)};
  const double h0 = hamiltonian(pot, start.x, start.v);
  auto max_drift = [&](double step) {
    double worst = 0.0;
    flow(pot, start, 0.0, -1.3, step, nullptr, [&](double, const PhasePoint& q) {
      worst = std::max(worst, std::abs(hamiltonian(pot, q.x, q.v) - h0));
    });
    return worst;
  };
  const double coarse = max_drift(2e-2);
  const double fine = max_drift(1e-2);
  EXPECT_NEAR(coarse / fine, 4.0, 0.3);
}

TEST(Flow, TimeShiftCovariance) {
  const auto pot = harmonic();
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const PhasePoint start{0.5 * Vec3(u(gen), u(gen), u(gen)), Vec3(u(gen), u(gen), u(gen))};
    const double t = 2 * u(gen), s = t - 1.0 - u(gen), shift = 3 * u(gen);
    const PhasePoint a = flow(pot, start, t, s, 1e-3);
    const PhasePoint b = flow(pot, start, t + shift, s + shift, 1e-3);
    EXPECT_LT((a.x - b.x).norm(), 1e-12);
    EXPECT_LT((a.v - b.v).norm(), 1e-12);
  }
}

TEST(Flow, LeavingTheDomainThrows) {
  EXPECT_THROW(flow(kZero, {Vec3::Zero(), Vec3(1, 0, 0)}, 3.0, 0.0, 1e-2, &kBall), LeftDomain);
}

TEST(Flow, VelocityBound) {
  const auto pot = harmonic();
  const double bound = std::sqrt(2 * pot.sup_norm());
  std::mt19937 gen(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    Vec3 x(g(gen), g(gen), g(gen));
    x *= 0.9 / std::max(1.0, x.norm());
    const Vec3 v(g(gen), g(gen), g(gen));
    trace_backward(kBall, pot, {x, v}, 2.0, 1e-3, [&](double, const PhasePoint& q) {
      EXPECT_LE(std::abs(v.norm() - q.v.norm()), bound + 1e-6);
    });
  }
}

TEST(BackwardExit, RaySphere) {
  ExitPoint e = backward_exit(kBall, kZero, {Vec3::Zero(), Vec3(1, 0, 0)});
  EXPECT_NEAR(e.t_b, 1.0, 1e-9);
  EXPECT_LT((e.x_b - Vec3(-1, 0, 0)).norm(), 1e-9);
  EXPECT_LT((e.v_b - Vec3(1, 0, 0)).norm(), 1e-15);
  e = backward_exit(kBall, kZero, {Vec3(0.5, 0, 0), Vec3(1, 0, 0)});
  EXPECT_NEAR(e.t_b, 1.5, 1e-9);
  EXPECT_LT((e.x_b - Vec3(-1, 0, 0)).norm(), 1e-9);
  EXPECT_LE(std::abs(kBall.level(e.x_b)), kBall.tolerances().crossing);
}

TEST(BackwardExit, BoundaryStarts) {
  // Inward-pointing velocity: the backward path is outside immediately.
  const ExitPoint in = backward_exit(kBall, kZero, {Vec3(1, 0, 0), Vec3(-1, 0, 0)});
  EXPECT_GT(in.t_b, 0.0);
  EXPECT_LE(in.t_b, 1e-8);
  // Outward velocity: the backward path crosses the whole chord.
  const ExitPoint out = backward_exit(kBall, kZero, {Vec3(1, 0, 0), Vec3(1, 0, 0)});
  EXPECT_NEAR(out.t_b, 2.0, 1e-8);
  // Grazing: short but strictly positive flight.
  const ExitPoint graze = backward_exit(kBall, kZero, {Vec3(1, 0, 0), Vec3(0, 1, 0)});
  EXPECT_GT(graze.t_b, 0.0);
  EXPECT_LT(graze.t_b, 1e-3);
}

TEST(BackwardExit, HarmonicExitLiesOnBoundaryAndConservesEnergy) {
  const auto pot = harmonic();
  std::mt19937 gen(12);
  std::normal_distribution<double> g;
  for (int i = 0; i < 30; ++i) {
    const Vec3 x = 0.5 * Vec3(g(gen), g(gen), g(gen)).normalized();
    // |v| >= 1.5 puts the orbit's apocentre outside the unit ball.
    const Vec3 v = (1.5 + std::abs(g(gen))) * Vec3(g(gen), g(gen), g(gen)).normalized();
    const ExitPoint e = backward_exit(kBall, pot, {x, v}, 1e-3);
    EXPECT_LE(std::abs(kBall.level(e.x_b)), 1e-12);
    EXPECT_LT(std::abs(hamiltonian(pot, e.x_b, e.v_b) - hamiltonian(pot, x, v)), 1e-6);
    // Step-halved integration agrees.
    const ExitPoint f = backward_exit(kBall, pot, {x, v}, 5e-4);
    EXPECT_NEAR(e.t_b, f.t_b, 1e-5);
  }
}

TEST(BackwardExit, TrappedOrbitThrows) {
  PotentialSpec s;
  s.kind = PotentialKind::Harmonic;
  s.kappa = 100.0;
  const PotentialField stiff(s, kBall, 16);
  // Energy 0.5 * 0.01 + 0 is far below the rim value 50: never exits.
  EXPECT_THROW(backward_exit(kBall, stiff, {Vec3::Zero(), Vec3(0.1, 0, 0)}, 0.05), ExitNotFound);
}

TEST(DiffuseSampler, OutgoingAndMoments) {
  RngStream rng(5, 0);
  const Vec3 n = Vec3(1, 2, -2).normalized();
  const int m = 200000;
  double sum_n = 0, sum_n2 = 0, sum_t2 = 0;
  const Vec3 t = n.cross(Vec3::UnitZ()).normalized();
  for (int i = 0; i < m; ++i) {
    const Vec3 v = sample_diffuse_velocity(rng, n);
    ASSERT_GT(n.dot(v), 0.0);
    sum_n += n.dot(v);
    sum_n2 += n.dot(v) * n.dot(v);
    sum_t2 += t.dot(v) * t.dot(v);
  }
  const double mean = sum_n / m;
  const double se = std::sqrt((sum_n2 / m - mean * mean) / m);
  EXPECT_NEAR(mean, std::sqrt(std::numbers::pi / 2), 4 * se);
  EXPECT_NEAR(sum_t2 / m, 1.0, 4 * std::sqrt(2.0 / m));
}

TEST(DiffuseSampler, Normalizer) {
  EXPECT_NEAR(diffuse_normalizer_quadrature(), 1.0 / (2 * std::numbers::pi), 1e-12);
}

TEST(BackCycle, ShortTimeSingleRecord) {
  RngStream rng(1, 0);
  const auto c = build_back_cycle(kBall, kZero, rng, 0.5, Vec3::Zero(), Vec3(1, 0, 0), 10);
  ASSERT_EQ(c.records.size(), 1u);
  EXPECT_EQ(c.termination, CycleTermination::ReachedInitialTime);
  EXPECT_NEAR(c.records[0].t, -0.5, 1e-9);
}

TEST(BackCycle, RecordInvariants) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream rng(77, s);
    const auto c = build_back_cycle(kBall, kZero, rng, 10.0, Vec3(0.2, 0, 0), Vec3(0, 1, 0), 200);
    double prev = 10.0;
    for (const auto& r : c.records) {
      EXPECT_LT(r.t, prev);
      prev = r.t;
      EXPECT_LE(std::abs(kBall.level(r.x)), kBall.tolerances().crossing);
      EXPECT_GT(outward_normal(kBall, r.x).dot(r.v), 0.0);
    }
  }
}

TEST(BackCycle, MeanBounceCountReproducible) {
  auto mean_bounces = [] {
    double total = 0;
    for (std::uint64_t s = 0; s < 2000; ++s) {
      RngStream rng(2024, s);
      total += build_back_cycle(kBall, kZero, rng, 10.0, Vec3::Zero(), Vec3(1, 0, 0), 1000)
                   .records.size();
    }
    return total / 2000;
  };
  const double a = mean_bounces();
  EXPECT_EQ(a, mean_bounces());
  EXPECT_GT(a, 2.0);
  EXPECT_LT(a, 100.0);
}

TEST(CycleReach, MonotoneAndDeterministic) {
  const PhasePoint start{Vec3::Zero(), Vec3(1, 0, 0)};
  const auto one = cycle_reach_curve(kBall, kZero, 5.0, start, {2, 5, 10, 15}, 2000, 3, 1);
  const auto two = cycle_reach_curve(kBall, kZero, 5.0, start, {2, 5, 10, 15}, 2000, 3, 3);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].estimate, two[i].estimate);
  for (std::size_t i = 1; i < one.size(); ++i) {
    EXPECT_GE(one[i - 1].estimate - one[i].estimate, -2 * one[i].std_error);
  }
}

TEST(CycleReach, UnreachableIndexGivesZero) {
  const auto r =
      cycle_reach_probability(kBall, kZero, 0.5, {Vec3::Zero(), Vec3(1, 0, 0)}, 3, 200, 1);
  EXPECT_EQ(r.estimate, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(Jacobian, FreeFlight) {
  const auto j = jacobian_flow(kZero, {Vec3(0.1, 0, 0), Vec3(0.3, 0.2, 0.1)}, 1.0, 0.2, 1e-3);
  EXPECT_LT((j.dXdv - (0.2 - 1.0) * Mat3::Identity()).norm(), 1e-12);
  EXPECT_NEAR(j.det(), std::pow(0.2 - 1.0, 3), 1e-8);
}

TEST(Jacobian, Harmonic) {
  const auto pot = harmonic();
  for (double s : {-0.5, -1.0, -2.0, -3.0}) {
    const auto j = jacobian_flow(pot, {Vec3(0.1, 0.2, 0), Vec3(0.3, 0.2, 0.1)}, 0.0, s, 1e-3);
    EXPECT_LT((j.dXdv - std::sin(s) * Mat3::Identity()).norm(), 1e-6);
    EXPECT_NEAR(j.det(), std::pow(std::sin(s), 3), 1e-6);
  }
}

TEST(Jacobian, MatchesFiniteDifferences) {
  PotentialSpec spec;
  spec.kind = PotentialKind::GaussianBump;
  spec.amplitude = 1.0;
  spec.width = 0.5;
  const PotentialField pot(spec, kBall, 16);
  const PhasePoint start{Vec3(0.1, -0.2, 0.05), Vec3(0.4, 0.1, -0.3)};
  const auto j = jacobian_flow(pot, start, 0.0, -1.5, 1e-3);
  const double h = 1e-6;
  Mat3 fd;
  for (int k = 0; k < 3; ++k) {
    PhasePoint a = start, b = start;
    a.v[k] += h;
    b.v[k] -= h;
    fd.col(k) = (flow(pot, a, 0.0, -1.5, 1e-3).x - flow(pot, b, 0.0, -1.5, 1e-3).x) / (2 * h);
  }
  EXPECT_NEAR(j.det(), fd.determinant(), 1e-4);
}
