#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kbte/fields.hpp"
#include "kbte/geometry.hpp"
#include "kbte/spatial_grid.hpp"
#include "kbte/velocity_grid.hpp"

namespace kbte {

/// Domain, potential, weight and the two grids, with the per-node factors
/// every phase-space computation needs. Node (x_i, v_a) has flat index
/// a * nx + i (velocity-major).
class PhaseSpace {
 public:
  PhaseSpace(LevelSetDomain domain, PotentialField potential, SpatialGrid x_grid,
             VelocityGrid v_grid, WeightSpec weight);

  const LevelSetDomain& domain() const { return domain_; }
  const PotentialField& potential() const { return potential_; }
  const SpatialGrid& x_grid() const { return x_grid_; }
  const VelocityGrid& v_grid() const { return v_grid_; }
  const WeightSpec& weight_spec() const { return weight_; }

  std::size_t nx() const { return x_grid_.size(); }
  std::size_t nv() const { return v_grid_.size(); }
  std::size_t size() const { return nx() * nv(); }
  std::size_t index(std::size_t a, std::size_t i) const { return a * nx() + i; }
  /// Quadrature weight of one phase node.
  double cell_weight() const { return x_grid_.weight() * v_grid_.weight(); }

  double phi(std::size_t i) const { return phi_[i]; }
  /// e^{-Phi(x_i)}.
  double damping_factor(std::size_t i) const { return exp_phi_[i]; }
  double mu_E(std::size_t a, std::size_t i) const { return exp_phi_[i] * v_grid_.mu()[a]; }
  double sqrt_mu_E(std::size_t a, std::size_t i) const {
    return sqrt_exp_phi_[i] * v_grid_.sqrt_mu()[a];
  }
  /// w(x_i, v_a) at every node, flat layout.
  const std::vector<double>& weights() const { return w_; }
  /// Integral of mu_E over the discrete phase space.
  double equilibrium_mass() const { return equilibrium_mass_; }

 private:
  LevelSetDomain domain_;
  PotentialField potential_;
  SpatialGrid x_grid_;
  VelocityGrid v_grid_;
  WeightSpec weight_;
  std::vector<double> phi_;
  std::vector<double> exp_phi_;
  std::vector<double> sqrt_exp_phi_;
  std::vector<double> w_;
  double equilibrium_mass_ = 0.0;
};

enum class Representation {
  /// Node values are F.
  Full,
  /// Node values are h = w f with F = mu_E + mu_E^{1/2} f.
  WeightedPerturbation,
};

/// Node values on a phase space. Internally every solver works with the
/// ratio perturbation q = F / mu_E - 1 = f / mu_E^{1/2}, which is constant
/// along characteristics together with mu_E and w.
struct DistributionField {
  std::shared_ptr<const PhaseSpace> space;
  Representation rep = Representation::Full;
  std::vector<double> values;

  static DistributionField equilibrium(std::shared_ptr<const PhaseSpace> space,
                                       Representation rep = Representation::Full);
  static DistributionField from_ratio(std::shared_ptr<const PhaseSpace> space, Representation rep,
                                      const std::vector<double>& q);
  std::vector<double> ratio_perturbation() const;
  /// f = mu_E^{1/2} q at every node.
  std::vector<double> perturbation() const;
  DistributionField as(Representation target) const;
};

/// Initial data, all satisfying int F0 = int mu_E on the grid.
/// f0 = amplitude * psi / w with psi drawn uniformly in [-1, 1] per node
/// (seeded), mass removed along mu_E^{1/2}, then rescaled to
/// ||w f0||_inf = amplitude.
DistributionField random_perturbation(std::shared_ptr<const PhaseSpace> space, double amplitude,
                                      std::uint64_t seed,
                                      Representation rep = Representation::WeightedPerturbation);
/// f0 proportional to (cos(pi x_1 / 2R) v_1 + sin(pi x_2 / R) / 2) / w, mass removed and
/// scaled to ||w f0||_inf = amplitude.
DistributionField smooth_perturbation(std::shared_ptr<const PhaseSpace> space, double amplitude,
                                      Representation rep = Representation::WeightedPerturbation);
/// F0 = c (mu_E + mu_E^{1/2} amplitude chi(|x - center| / radius) / w), chi(s) = (1-s^2)^2
/// on s < 1, with c restoring the equilibrium mass. A bump narrower than the
/// grid is carried by the node nearest to its center.
DistributionField bump_initial(std::shared_ptr<const PhaseSpace> space, double amplitude,
                               const Vec3& center, double radius);
/// F0 = c mu_E (1 + 0.9 psi), psi uniform in [-1, 1] per node: a random nonnegative field.
DistributionField random_nonnegative(std::shared_ptr<const PhaseSpace> space, std::uint64_t seed);

}  // namespace kbte
