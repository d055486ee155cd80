#pragma once

#include <cmath>
#include <functional>

#include "kbte/geometry.hpp"
#include "kbte/types.hpp"

namespace kbte {

enum class PotentialKind { Zero, Harmonic, GaussianBump, Custom };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::Zero;
  /// Harmonic stiffness: Phi = kappa |x - center|^2 / 2.
  double kappa = 1.0;
  /// Gaussian bump: Phi = amplitude exp(-|x - center|^2 / width^2).
  double amplitude = 0.0;
  double width = 1.0;
  Vec3 center = Vec3::Zero();
};

/// Time-independent external potential with analytic derivatives.
///
/// On construction the potential is shifted by a constant (if needed) so that
/// Phi >= 0 on the sampled closure of the domain, and its sup-norm over the
/// domain is cached from a dense sample.
class PotentialField {
 public:
  using ScalarFn = std::function<double(const Vec3&)>;
  using VectorFn = std::function<Vec3(const Vec3&)>;
  using MatrixFn = std::function<Mat3(const Vec3&)>;

  PotentialField(const PotentialSpec& spec, const LevelSetDomain& domain,
                 int samples_per_axis = 64);
  PotentialField(ScalarFn phi, VectorFn grad, MatrixFn hessian, const LevelSetDomain& domain,
                 int samples_per_axis = 64);

  static PotentialField zero(const LevelSetDomain& domain) {
    return PotentialField(PotentialSpec{}, domain);
  }

  double phi(const Vec3& x) const;
  Vec3 grad(const Vec3& x) const;
  Mat3 hessian(const Vec3& x) const;

  double sup_norm() const { return sup_norm_; }
  /// Constant added to the raw formula so that Phi >= 0 on the domain.
  double offset() const { return offset_; }
  bool is_zero() const { return spec_.kind == PotentialKind::Zero; }
  const PotentialSpec& spec() const { return spec_; }

 private:
  double raw_phi(const Vec3& x) const;
  void sample_range(const LevelSetDomain& domain, int samples_per_axis);

  PotentialSpec spec_;
  ScalarFn custom_phi_;
  VectorFn custom_grad_;
  MatrixFn custom_hessian_;
  double offset_ = 0.0;
  double sup_norm_ = 0.0;
};

/// mu(v) = exp(-|v|^2/2), unnormalized.
inline double global_maxwellian(const Vec3& v) { return std::exp(-0.5 * v.squaredNorm()); }

/// mu_E(x,v) = exp(-Phi(x)) mu(v).
inline double local_maxwellian(const PotentialField& pot, const Vec3& x, const Vec3& v) {
  return std::exp(-pot.phi(x) - 0.5 * v.squaredNorm());
}

inline double hamiltonian(const PotentialField& pot, const Vec3& x, const Vec3& v) {
  return 0.5 * v.squaredNorm() + pot.phi(x);
}

/// Exponent of the polynomial weight w = (1 + |v|^2/2 + Phi)^(beta/2).
class WeightSpec {
 public:
  /// Throws ValidationError unless beta > 5.
  explicit WeightSpec(double beta);

  /// Weight identically one. Only meant for tests that need K_w == K.
  static WeightSpec identity() { return WeightSpec(0.0, Unchecked{}); }

  double beta() const { return beta_; }

  /// w as a function of the energy H = |v|^2/2 + Phi.
  double of_energy(double energy) const {
    return beta_ == 0.0 ? 1.0 : std::pow(1.0 + energy, 0.5 * beta_);
  }

 private:
  struct Unchecked {};
  WeightSpec(double beta, Unchecked) : beta_(beta) {}
  double beta_;
};

inline double weight_w(const WeightSpec& spec, const PotentialField& pot, const Vec3& x,
                       const Vec3& v) {
  return spec.of_energy(hamiltonian(pot, x, v));
}

/// 1 / (w mu_E^{1/2}); depends on (x,v) only through the energy.
inline double weight_tilde(const WeightSpec& spec, const PotentialField& pot, const Vec3& x,
                           const Vec3& v) {
  const double energy = hamiltonian(pot, x, v);
  return std::exp(0.5 * energy) / spec.of_energy(energy);
}

}  // namespace kbte
