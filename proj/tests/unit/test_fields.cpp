#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kbte/errors.hpp"
#include "kbte/fields.hpp"

using namespace kbte;

namespace {

const LevelSetDomain kBall = LevelSetDomain::ball();

PotentialField harmonic(double kappa = 1.0) {
  PotentialSpec s;
  s.kind = PotentialKind::Harmonic;
  s.kappa = kappa;
  return PotentialField(s, kBall, 32);
}

PotentialField bump(double amplitude) {
  PotentialSpec s;
  s.kind = PotentialKind::GaussianBump;
  s.amplitude = amplitude;
  s.width = 0.4;
  s.center = Vec3(0.2, -0.1, 0.3);
  return PotentialField(s, kBall, 32);
}

void expect_derivatives_match(const PotentialField& pot) {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-0.55, 0.55);
  const double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const Vec3 x(u(gen), u(gen), u(gen));
    Vec3 g_fd;
    Mat3 h_fd;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      g_fd[k] = (pot.phi(x + e) - pot.phi(x - e)) / (2 * h);
      h_fd.col(k) = (pot.grad(x + e) - pot.grad(x - e)) / (2 * h);
    }
    EXPECT_LT((g_fd - pot.grad(x)).norm(), 1e-5);
    EXPECT_LT((h_fd - pot.hessian(x)).norm(), 1e-5);
  }
}

}  // namespace

TEST(Maxwellian, Values) {
  EXPECT_DOUBLE_EQ(global_maxwellian(Vec3::Zero()), 1.0);
  EXPECT_NEAR(global_maxwellian(Vec3(std::sqrt(2.0), 0, 0)), std::exp(-1.0), 1e-15);
}

TEST(Maxwellian, TruncatedGridQuadrature) {
  const double rv = 8.0;
  const int n = 24;
  const double h = 2 * rv / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 v(-rv + (i + 0.5) * h, -rv + (j + 0.5) * h, -rv + (k + 0.5) * h);
        sum += global_maxwellian(v) * h * h * h;
      }
  EXPECT_NEAR(sum, std::pow(2 * std::numbers::pi, 1.5), 1e-6);
}

TEST(Maxwellian, LocalReducesToGlobalForZeroPotential) {
  const auto zero = PotentialField::zero(kBall);
  const Vec3 v(0.3, -1.2, 0.4);
  EXPECT_DOUBLE_EQ(local_maxwellian(zero, Vec3(0.1, 0.2, 0.3), v), global_maxwellian(v));
  const auto pot = harmonic();
  EXPECT_NEAR(local_maxwellian(pot, Vec3(1, 0, 0), Vec3::Zero()), std::exp(-0.5), 1e-15);
}

TEST(Potential, HarmonicIsNonnegativeAndSupNorm) {
  const auto pot = harmonic();
  EXPECT_DOUBLE_EQ(pot.offset(), 0.0);
  EXPECT_NEAR(pot.sup_norm(), 0.5, 1e-9);
  EXPECT_NEAR(pot.phi(Vec3(1, 0, 0)), 0.5, 1e-15);
}

TEST(Potential, NegativeStiffnessIsShifted) {
  const auto pot = harmonic(-1.0);
  EXPECT_NEAR(pot.offset(), 0.5, 1e-9);
  EXPECT_GE(pot.phi(Vec3(0.6, 0.8, 0.0)), -1e-9);
}

TEST(Potential, NegativeBumpIsShiftedNonnegative) {
  const auto pot = bump(-2.0);
  std::mt19937 gen(2);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    Vec3 x(g(gen), g(gen), g(gen));
    if (x.norm() > 1.0) x.normalize();
    EXPECT_GE(pot.phi(x), -1e-3);
  }
  EXPECT_GT(pot.offset(), 1.5);
}

TEST(Potential, DerivativesMatchFiniteDifferences) {
  expect_derivatives_match(harmonic(1.3));
  expect_derivatives_match(bump(1.5));
}

TEST(Weight, RejectsSmallBeta) {
  EXPECT_THROW(WeightSpec(5.0), ValidationError);
  EXPECT_THROW(WeightSpec(4.0), ValidationError);
  EXPECT_NO_THROW(WeightSpec(5.5));
}

TEST(Weight, Values) {
  const auto zero = PotentialField::zero(kBall);
  const WeightSpec b6(6.0);
  EXPECT_DOUBLE_EQ(weight_w(b6, zero, Vec3::Zero(), Vec3::Zero()), 1.0);
  EXPECT_NEAR(weight_w(b6, zero, Vec3::Zero(), Vec3(std::sqrt(2.0), 0, 0)), 8.0, 1e-12);
  const auto pot = harmonic(2.0);  // Phi(1,0,0) = 1
  EXPECT_NEAR(weight_w(b6, pot, Vec3(1, 0, 0), Vec3::Zero()), 8.0, 1e-12);
  EXPECT_DOUBLE_EQ(weight_tilde(b6, zero, Vec3::Zero(), Vec3::Zero()), 1.0);
}

TEST(Weight, IdentityAndMonotonicity) {
  const auto pot = harmonic();
  const WeightSpec spec(7.0);
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-0.57, 0.57);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(u(gen), u(gen), u(gen));
    const Vec3 v(g(gen), g(gen), g(gen));
    const double w = weight_w(spec, pot, x, v);
    EXPECT_GE(w, 1.0);
    EXPECT_NEAR(w * weight_tilde(spec, pot, x, v) * std::sqrt(local_maxwellian(pot, x, v)), 1.0,
                1e-12);
    EXPECT_GE(weight_w(spec, pot, x, 1.1 * v), w);
    EXPECT_GE(weight_w(spec, pot, 1.1 * x, v), w);
  }
}

TEST(Weight, TildeFluxIntegralConverges) {
  // int_{v3 > 0} w~ c_mu mu v3 dv over growing cutoffs.
  const auto zero = PotentialField::zero(kBall);
  const WeightSpec spec(6.0);
  auto integral = [&](double rv) {
    const int n = static_cast<int>(rv * 6);
    const double h = 2 * rv / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = n / 2; k < n; ++k) {
          const Vec3 v(-rv + (i + 0.5) * h, -rv + (j + 0.5) * h, -rv + (k + 0.5) * h);
          sum += weight_tilde(spec, zero, Vec3::Zero(), v) * global_maxwellian(v) * v.z() * h *
                 h * h / (2 * std::numbers::pi);
        }
    return sum;
  };
  const double a = integral(6.0);
  const double b = integral(8.0);
  const double c = integral(10.0);
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_LT(std::abs(c - b), std::abs(b - a) + 1e-12);
  EXPECT_LT(std::abs(c - b), 1e-4 * c);
}

TEST(Hamiltonian, Values) {
  EXPECT_DOUBLE_EQ(hamiltonian(PotentialField::zero(kBall), Vec3::Zero(), Vec3(1, 0, 0)), 0.5);
  EXPECT_DOUBLE_EQ(hamiltonian(harmonic(), Vec3(1, 0, 0), Vec3(1, 0, 0)), 1.0);
}
