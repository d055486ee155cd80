#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "kbte/diagnostics.hpp"
#include "kbte/errors.hpp"

using namespace kbte;

namespace {

std::shared_ptr<const PhaseSpace> small_space() {
  static const auto s = [] {
    const auto dom = LevelSetDomain::ball();
    return std::make_shared<const PhaseSpace>(dom, PotentialField::zero(dom), SpatialGrid(dom, 6),
                                              VelocityGrid(4.0, 8), WeightSpec(6.0));
  }();
  return s;
}

const CollisionModel& small_model() {
  static const CollisionModel m(VelocityGrid(4.0, 8), KernelSpec::hard_sphere());
  return m;
}

DistributionField scaled_equilibrium(double c) {
  auto F = DistributionField::equilibrium(small_space());
  for (double& x : F.values) x *= c;
  return F;
}

}  // namespace

TEST(DiagnosticsSeries, CsvRoundTripIsExact) {
  DiagnosticsSeries s({"a", "b"});
  s.metadata()["seed"] = "42";
  s.append(0.0, {1.0 / 3.0, -2.5e-17});
  s.append(0.1, {std::exp(1.0), 1e300});
  const std::string csv = s.to_csv();
  EXPECT_EQ(csv.rfind("# seed=42\nt,a,b\n", 0), 0u);
  const auto back = DiagnosticsSeries::from_csv(csv);
  EXPECT_EQ(back.times(), s.times());
  EXPECT_EQ(back.channel("a"), s.channel("a"));
  EXPECT_EQ(back.channel("b"), s.channel("b"));
  EXPECT_EQ(back.metadata().at("seed"), "42");
  EXPECT_EQ(back.to_csv(), csv);
}

TEST(DiagnosticsSeries, RejectsBadRows) {
  DiagnosticsSeries s({"a"});
  s.append(1.0, {0.0});
  EXPECT_THROW(s.append(1.0, {0.0}), ValidationError);
  EXPECT_THROW(s.append(2.0, {0.0, 1.0}), ValidationError);
  EXPECT_THROW(s.channel("missing"), ValidationError);
  EXPECT_THROW(DiagnosticsSeries::from_csv("t,a\n0,1\n1\n"), ParseError);
  EXPECT_THROW(DiagnosticsSeries::from_csv("x,a\n"), ParseError);
}

TEST(TotalMass, ZeroFieldHasNoMass) {
  EXPECT_EQ(total_mass(scaled_equilibrium(0.0)), 0.0);
}

TEST(RelativeEntropy, VanishesAtEquilibrium) {
  EXPECT_NEAR(relative_entropy(scaled_equilibrium(1.0)), 0.0, 1e-14);
}

TEST(RelativeEntropy, ConstantRatioClosedForm) {
  const double m = small_space()->equilibrium_mass();
  EXPECT_NEAR(relative_entropy(scaled_equilibrium(2.0)), (2.0 * std::log(2.0) - 1.0) * m, 1e-12 * m);
  EXPECT_NEAR(relative_entropy(scaled_equilibrium(0.5)), (0.5 * std::log(0.5) + 0.5) * m, 1e-12 * m);
  // F = 0 contributes mu_E at every node.
  EXPECT_NEAR(relative_entropy(scaled_equilibrium(0.0)), m, 1e-12 * m);
}

TEST(RelativeEntropy, PositiveAwayFromEquilibriumAndRejectsNegatives) {
  const auto F = random_nonnegative(small_space(), 9);
  EXPECT_GT(relative_entropy(F), 0.0);
  auto G = scaled_equilibrium(1.0);
  G.values[5] = -1e-3;
  EXPECT_THROW(relative_entropy(G), NegativeDistribution);
}

TEST(EntropyL1L2, ConstantRatioBothSides) {
  const auto F = scaled_equilibrium(2.0);
  const double E0 = relative_entropy(F);
  const auto r = entropy_l1l2_check(F, E0);
  // f = mu_E^{1/2}: every node sits in the quadratic region.
  const double m = small_space()->equilibrium_mass();
  EXPECT_NEAR(r.quadratic, 0.25 * m, 1e-12 * m);
  EXPECT_NEAR(r.linear, 0.0, 1e-12 * m);
  EXPECT_TRUE(r.holds);
  const auto eq = entropy_l1l2_check(scaled_equilibrium(1.0), 0.0);
  EXPECT_NEAR(eq.lhs(), 0.0, 1e-14);
  EXPECT_TRUE(eq.holds);
}

TEST(EntropyL1L2, HoldsPointwiseForRandomData) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto F = bump_initial(small_space(), 100.0 * static_cast<double>(seed), Vec3::Zero(), 0.4);
    const auto r = entropy_l1l2_check(F, relative_entropy(F));
    EXPECT_TRUE(r.holds);
    EXPECT_GT(r.linear, 0.0);
  }
}

TEST(Norms, ZeroPerturbation) {
  const auto n = norms(scaled_equilibrium(1.0));
  EXPECT_EQ(n.l2, 0.0);
  EXPECT_EQ(n.weighted_sup, 0.0);
  EXPECT_EQ(n.boundary_gamma_plus, 0.0);
}

TEST(Norms, SingleNode) {
  const auto s = small_space();
  std::vector<double> q(s->size(), 0.0);
  const std::size_t a = 7, i = 3, k = s->index(a, i);
  q[k] = 1.0 / s->sqrt_mu_E(a, i);
  const auto f = DistributionField::from_ratio(s, Representation::Full, q);
  const auto n = norms(f);
  EXPECT_NEAR(n.l2, std::sqrt(s->cell_weight()), 1e-12);
  EXPECT_NEAR(n.weighted_sup, s->weights()[k], 1e-9 * s->weights()[k]);
}

TEST(Norms, BoundaryNormPythagoras) {
  // Split a trace at one station into its P_gamma part and the rest; the
  // squared gamma_plus norms add.
  const VelocityGrid& g = small_space()->v_grid();
  const Vec3 n(0.0, 0.6, 0.8);
  std::vector<double> f(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    const Vec3& v = g.node(a);
    f[a] = g.sqrt_mu()[a] * (1.0 + 0.3 * v.x() + 0.2 * v.squaredNorm() + std::sin(v.y()));
  }
  const auto p = project_Pgamma(g, f, n);
  std::vector<double> r(f.size());
  for (std::size_t a = 0; a < f.size(); ++a) r[a] = f[a] - p[a];
  const double full = gamma_plus_inner(g, f, f, n);
  const double split = gamma_plus_inner(g, p, p, n) + gamma_plus_inner(g, r, r, n);
  EXPECT_NEAR(full, split, 1e-12 * full);
}

TEST(FitDecayRate, ExactOnSyntheticExponential) {
  std::vector<double> t, y;
  for (int k = 0; k <= 50; ++k) {
    t.push_back(0.1 * k);
    y.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const auto fit = fit_decay_rate(t, y, 0.0, 5.0);
  EXPECT_NEAR(fit.rate, 2.0, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
  EXPECT_EQ(fit.samples, 51);
  const auto window = fit_decay_rate(t, y, 1.0, 2.0);
  EXPECT_EQ(window.samples, 11);
  EXPECT_NEAR(window.rate, 2.0, 1e-10);
}

TEST(FitDecayRate, ConstantChannelAndErrors) {
  const std::vector<double> t{0.0, 1.0, 2.0}, y{4.0, 4.0, 4.0};
  const auto fit = fit_decay_rate(t, y, 0.0, 2.0);
  EXPECT_NEAR(fit.rate, 0.0, 1e-15);
  EXPECT_EQ(fit.r_squared, 1.0);
  EXPECT_THROW(fit_decay_rate(t, {1.0, 0.0, 1.0}, 0.0, 2.0), NonPositiveChannel);
  EXPECT_THROW(fit_decay_rate(t, y, 5.0, 6.0), ValidationError);
}

TEST(RfMonitor, EquilibriumGivesOne) {
  const auto r = rf_ratio(scaled_equilibrium(1.0), small_model());
  for (double x : r) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(RfMonitor, NonnegativeForNonnegativeF) {
  EXPECT_GE(rf_lower_bound_monitor(random_nonnegative(small_space(), 2), small_model()), 0.0);
  EXPECT_NEAR(rf_lower_bound_monitor(scaled_equilibrium(0.0), small_model()), 0.0, 1e-12);
}

TEST(RfMonitor, FittedWarmup) {
  const std::vector<double> t{0, 1, 2, 3, 4}, r{0.2, 0.6, 0.4, 0.7, 0.8};
  EXPECT_EQ(fitted_warmup(t, r, 0.5), 3.0);
  EXPECT_EQ(fitted_warmup(t, {0.9, 0.9, 0.9, 0.9, 0.9}, 0.5), 0.0);
  EXPECT_TRUE(std::isinf(fitted_warmup(t, {0.9, 0.9, 0.9, 0.9, 0.1}, 0.5)));
}

TEST(Coercivity, KernelAndGap) {
  const CollisionModel m(VelocityGrid(5.0, 10), KernelSpec::hard_sphere());
  const auto lin = assemble_linearized(m);
  const auto r = coercivity_report(lin, m.grid());
  for (double x : r.kernel_residuals) EXPECT_LE(x, 1e-6);
  ASSERT_GE(r.eigenvalues.size(), 6u);
  for (int k = 0; k < 5; ++k) EXPECT_LE(std::abs(r.eigenvalues[k]), 1e-6);
  EXPECT_GT(r.spectral_gap, 0.01);
  EXPECT_EQ(r.c_L, r.eigenvalues[5]);
}

TEST(KernelDecay, WeightedRowSumsDecayAtLeastLikeTheEstimate) {
  const CollisionModel m(VelocityGrid(6.0, 12), KernelSpec::hard_sphere());
  const auto lin = assemble_linearized(m);
  const double alpha = 1.0;
  const auto fit = kernel_row_decay(lin, m.grid(), WeightSpec(6.0), alpha);
  EXPECT_LE(fit.exponent, -1.0 - alpha);
  EXPECT_GT(fit.constant, 0.0);
  EXPECT_EQ(fit.speeds.size(), m.grid().size());
}
