#include "kbte/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "kbte/errors.hpp"

namespace kbte {

PotentialField::PotentialField(const PotentialSpec& spec, const LevelSetDomain& domain,
                               int samples_per_axis)
    : spec_(spec) {
  if (spec_.kind == PotentialKind::Custom) {
    throw ValidationError("custom potentials need explicit phi/grad/hessian callables");
  }
  if (spec_.kind == PotentialKind::GaussianBump && !(spec_.width > 0.0)) {
    throw ValidationError("gaussian potential width must be positive");
  }
  if (spec_.kind != PotentialKind::Zero) sample_range(domain, samples_per_axis);
}

PotentialField::PotentialField(ScalarFn phi, VectorFn grad, MatrixFn hessian,
                               const LevelSetDomain& domain, int samples_per_axis)
    : custom_phi_(std::move(phi)),
      custom_grad_(std::move(grad)),
      custom_hessian_(std::move(hessian)) {
  spec_.kind = PotentialKind::Custom;
  sample_range(domain, samples_per_axis);
}

double PotentialField::raw_phi(const Vec3& x) const {
  switch (spec_.kind) {
    case PotentialKind::Zero:
      return 0.0;
    case PotentialKind::Harmonic:
      return 0.5 * spec_.kappa * (x - spec_.center).squaredNorm();
    case PotentialKind::GaussianBump:
      return spec_.amplitude *
             std::exp(-(x - spec_.center).squaredNorm() / (spec_.width * spec_.width));
    case PotentialKind::Custom:
      return custom_phi_(x);
  }
  return 0.0;
}

double PotentialField::phi(const Vec3& x) const { return raw_phi(x) + offset_; }

Vec3 PotentialField::grad(const Vec3& x) const {
  switch (spec_.kind) {
    case PotentialKind::Zero:
      return Vec3::Zero();
    case PotentialKind::Harmonic:
      return spec_.kappa * (x - spec_.center);
    case PotentialKind::GaussianBump: {
      const Vec3 d = x - spec_.center;
      const double s2 = spec_.width * spec_.width;
      return (-2.0 * spec_.amplitude / s2) * std::exp(-d.squaredNorm() / s2) * d;
    }
    case PotentialKind::Custom:
      return custom_grad_(x);
  }
  return Vec3::Zero();
}

Mat3 PotentialField::hessian(const Vec3& x) const {
  switch (spec_.kind) {
    case PotentialKind::Zero:
      return Mat3::Zero();
    case PotentialKind::Harmonic:
      return spec_.kappa * Mat3::Identity();
    case PotentialKind::GaussianBump: {
      const Vec3 d = x - spec_.center;
      const double s2 = spec_.width * spec_.width;
      const double g = spec_.amplitude * std::exp(-d.squaredNorm() / s2);
      return (-2.0 * g / s2) * (Mat3::Identity() - (2.0 / s2) * d * d.transpose());
    }
    case PotentialKind::Custom:
      return custom_hessian_(x);
  }
  return Mat3::Zero();
}

void PotentialField::sample_range(const LevelSetDomain& domain, int samples_per_axis) {
  const int n = std::max(2, samples_per_axis);
  const double radius = domain.bounding_radius();
  const double h = 2.0 * radius / n;
  const double band = 2.0 * h;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec3& p) {
    const double value = raw_phi(p);
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 p = domain.center() + Vec3(-radius + (i + 0.5) * h, -radius + (j + 0.5) * h,
                                              -radius + (k + 0.5) * h);
        const double level = domain.level(p);
        if (level <= 0.0) visit(p);
        const double g = domain.gradient(p).norm();
        if (g > 0.0 && std::abs(level) / g < band) visit(project_to_boundary(domain, p));
      }
    }
  }
  if (!std::isfinite(lo)) throw ValidationError("domain contains no sample points");
  offset_ = lo < 0.0 ? -lo : 0.0;
  sup_norm_ = hi + offset_;
}

WeightSpec::WeightSpec(double beta) : beta_(beta) {
  if (!(beta > 5.0)) throw ValidationError("beta must exceed 5");
}

}  // namespace kbte
