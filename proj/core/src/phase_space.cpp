#include "kbte/phase_space.hpp"

#include <cmath>
#include <numbers>

#include "kbte/errors.hpp"
#include "kbte/rng.hpp"

namespace kbte {

PhaseSpace::PhaseSpace(LevelSetDomain domain, PotentialField potential, SpatialGrid x_grid,
                       VelocityGrid v_grid, WeightSpec weight)
    : domain_(std::move(domain)),
      potential_(std::move(potential)),
      x_grid_(std::move(x_grid)),
      v_grid_(std::move(v_grid)),
      weight_(weight) {
  const std::size_t n = x_grid_.size();
  phi_.resize(n);
  exp_phi_.resize(n);
  sqrt_exp_phi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi_[i] = potential_.phi(x_grid_.node(i));
    exp_phi_[i] = std::exp(-phi_[i]);
    sqrt_exp_phi_[i] = std::exp(-0.5 * phi_[i]);
  }
  w_.resize(size());
  double mu_sum = 0.0;
  for (double m : v_grid_.mu()) mu_sum += m;
  double x_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) x_sum += exp_phi_[i];
  equilibrium_mass_ = cell_weight() * mu_sum * x_sum;
  for (std::size_t a = 0; a < nv(); ++a) {
    const double e = 0.5 * v_grid_.node(a).squaredNorm();
    for (std::size_t i = 0; i < n; ++i) w_[index(a, i)] = weight_.of_energy(e + phi_[i]);
  }
}

DistributionField DistributionField::equilibrium(std::shared_ptr<const PhaseSpace> space,
                                                 Representation rep) {
  const std::vector<double> q(space->size(), 0.0);
  return from_ratio(std::move(space), rep, q);
}

DistributionField DistributionField::from_ratio(std::shared_ptr<const PhaseSpace> space,
                                                Representation rep,
                                                const std::vector<double>& q) {
  DistributionField out;
  out.rep = rep;
  out.values.resize(space->size());
  const std::size_t nx = space->nx();
  for (std::size_t a = 0; a < space->nv(); ++a) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = a * nx + i;
      out.values[k] = rep == Representation::Full
                          ? space->mu_E(a, i) * (1.0 + q[k])
                          : space->weights()[k] * space->sqrt_mu_E(a, i) * q[k];
    }
  }
  out.space = std::move(space);
  return out;
}

std::vector<double> DistributionField::ratio_perturbation() const {
  std::vector<double> q(values.size());
  const std::size_t nx = space->nx();
  for (std::size_t a = 0; a < space->nv(); ++a) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = a * nx + i;
      q[k] = rep == Representation::Full
                 ? values[k] / space->mu_E(a, i) - 1.0
                 : values[k] / (space->weights()[k] * space->sqrt_mu_E(a, i));
    }
  }
  return q;
}

std::vector<double> DistributionField::perturbation() const {
  std::vector<double> f = ratio_perturbation();
  const std::size_t nx = space->nx();
  for (std::size_t a = 0; a < space->nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) f[a * nx + i] *= space->sqrt_mu_E(a, i);
  return f;
}

DistributionField DistributionField::as(Representation target) const {
  if (target == rep) return *this;
  return from_ratio(space, target, ratio_perturbation());
}

namespace {

// Removes the component of q along the constant ratio (i.e. of f along
// mu_E^{1/2}) so that int mu_E q = 0, then scales sup |w f| to amplitude.
std::vector<double> normalize_perturbation(const PhaseSpace& s, std::vector<double> q,
                                           double amplitude) {
  const std::size_t nx = s.nx();
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) {
      num += s.mu_E(a, i) * q[a * nx + i];
      den += s.mu_E(a, i);
    }
  const double shift = num / den;
  double sup = 0.0;
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = a * nx + i;
      q[k] -= shift;
      sup = std::max(sup, std::abs(s.weights()[k] * s.sqrt_mu_E(a, i) * q[k]));
    }
  if (sup > 0.0)
    for (double& x : q) x *= amplitude / sup;
  return q;
}

}  // namespace

DistributionField random_perturbation(std::shared_ptr<const PhaseSpace> space, double amplitude,
                                      std::uint64_t seed, Representation rep) {
  const PhaseSpace& s = *space;
  const std::size_t nx = s.nx();
  std::vector<double> q(s.size());
  RngStream rng(seed, 0x5eed);
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = a * nx + i;
      q[k] = (2.0 * rng.uniform() - 1.0) / (s.weights()[k] * s.sqrt_mu_E(a, i));
    }
  return DistributionField::from_ratio(space, rep, normalize_perturbation(s, std::move(q), amplitude));
}

DistributionField smooth_perturbation(std::shared_ptr<const PhaseSpace> space, double amplitude,
                                      Representation rep) {
  const PhaseSpace& s = *space;
  const std::size_t nx = s.nx();
  const double r = s.domain().bounding_radius();
  const Vec3& c = s.domain().center();
  std::vector<double> q(s.size());
  for (std::size_t a = 0; a < s.nv(); ++a) {
    const Vec3& v = s.v_grid().node(a);
    for (std::size_t i = 0; i < nx; ++i) {
      const Vec3 x = s.x_grid().node(i) - c;
      const std::size_t k = a * nx + i;
      const double psi = std::cos(0.5 * std::numbers::pi * x.x() / r) * v.x() +
                         0.5 * std::sin(std::numbers::pi * x.y() / r);
      q[k] = psi / (s.weights()[k] * s.sqrt_mu_E(a, i));
    }
  }
  return DistributionField::from_ratio(space, rep, normalize_perturbation(s, std::move(q), amplitude));
}

namespace {

DistributionField restore_mass(std::shared_ptr<const PhaseSpace> space, std::vector<double> F) {
  double mass = 0.0;
  for (double x : F) mass += x;
  mass *= space->cell_weight();
  if (!(mass > 0.0)) throw ValidationError("initial data has no mass");
  const double c = space->equilibrium_mass() / mass;
  for (double& x : F) x *= c;
  DistributionField out;
  out.space = std::move(space);
  out.rep = Representation::Full;
  out.values = std::move(F);
  return out;
}

}  // namespace

DistributionField bump_initial(std::shared_ptr<const PhaseSpace> space, double amplitude,
                               const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw ValidationError("bump radius must be positive");
  const PhaseSpace& s = *space;
  const std::size_t nx = s.nx();
  std::vector<double> chi(nx, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < nx; ++i) {
    const double r = (s.x_grid().node(i) - center).norm() / radius;
    if (r < 1.0) {
      chi[i] = (1.0 - r * r) * (1.0 - r * r);
      any = true;
    }
  }
  if (!any) chi[s.x_grid().nearest(center)] = 1.0;
  std::vector<double> F(s.size());
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = a * nx + i;
      F[k] = s.mu_E(a, i) + s.sqrt_mu_E(a, i) * amplitude * chi[i] / s.weights()[k];
    }
  return restore_mass(std::move(space), std::move(F));
}

DistributionField random_nonnegative(std::shared_ptr<const PhaseSpace> space, std::uint64_t seed) {
  const PhaseSpace& s = *space;
  const std::size_t nx = s.nx();
  RngStream rng(seed, 0xf0);
  std::vector<double> F(s.size());
  for (std::size_t a = 0; a < s.nv(); ++a)
    for (std::size_t i = 0; i < nx; ++i) F[a * nx + i] = s.mu_E(a, i) * (1.0 + 0.9 * (2.0 * rng.uniform() - 1.0));
  return restore_mass(std::move(space), std::move(F));
}

}  // namespace kbte
