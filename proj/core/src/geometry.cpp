#include "kbte/geometry.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "kbte/errors.hpp"

namespace kbte {

LevelSetDomain::LevelSetDomain(DomainKind kind, LevelFn level, GradientFn gradient,
                               double bounding_radius, const Vec3& center, const Vec3& shape,
                               GeometryTolerances tol)
    : kind_(kind),
      level_(std::move(level)),
      gradient_(std::move(gradient)),
      bounding_radius_(bounding_radius),
      center_(center),
      shape_(shape),
      tol_(tol) {}

LevelSetDomain LevelSetDomain::ball(double radius, const Vec3& center, GeometryTolerances tol) {
  const double r2 = radius * radius;
  auto level = [center, r2](const Vec3& x) { return (x - center).squaredNorm() - r2; };
  auto gradient = [center](const Vec3& x) -> Vec3 { return 2.0 * (x - center); };
  return LevelSetDomain(DomainKind::Ball, level, gradient, radius, center,
                        Vec3::Constant(radius), tol);
}

LevelSetDomain LevelSetDomain::ellipsoid(const Vec3& semi_axes, const Vec3& center,
                                         GeometryTolerances tol) {
  const Vec3 inv2 = semi_axes.cwiseProduct(semi_axes).cwiseInverse();
  auto level = [center, inv2](const Vec3& x) {
    const Vec3 d = x - center;
    return d.cwiseProduct(d).dot(inv2) - 1.0;
  };
  auto gradient = [center, inv2](const Vec3& x) -> Vec3 {
    return 2.0 * (x - center).cwiseProduct(inv2);
  };
  return LevelSetDomain(DomainKind::Ellipsoid, level, gradient, semi_axes.maxCoeff(), center,
                        semi_axes, tol);
}

LevelSetDomain LevelSetDomain::custom(LevelFn level, GradientFn gradient, double bounding_radius,
                                      const Vec3& center, GeometryTolerances tol) {
  return LevelSetDomain(DomainKind::Custom, std::move(level), std::move(gradient),
                        bounding_radius, center, Vec3::Constant(bounding_radius), tol);
}

std::string to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Outgoing:
      return "Outgoing";
    case BoundaryClass::Grazing:
      return "Grazing";
    case BoundaryClass::Incoming:
      return "Incoming";
  }
  return "?";
}

Vec3 outward_normal(const LevelSetDomain& domain, const Vec3& x) {
  const Vec3 g = domain.gradient(x);
  const double norm = g.norm();
  if (!(norm > domain.tolerances().min_gradient)) {
    throw DegenerateGradient("level-set gradient vanishes at boundary point");
  }
  return g / norm;
}

BoundaryClass classify_boundary(const LevelSetDomain& domain, const Vec3& x, const Vec3& v,
                                double tol) {
  const double nv = outward_normal(domain, x).dot(v);
  if (nv > tol) return BoundaryClass::Outgoing;
  if (nv < -tol) return BoundaryClass::Incoming;
  return BoundaryClass::Grazing;
}

std::optional<double> path_boundary_crossing(const LevelSetDomain& domain,
                                             const std::function<Vec3(double)>& path) {
  const auto& tol = domain.tolerances();
  double lo = 0.0;
  double hi = 1.0;
  double f_lo = domain.level(path(lo));
  const double f_hi = domain.level(path(hi));
  if (f_lo == 0.0) return 0.0;
  if (f_hi == 0.0) return 1.0;
  if ((f_lo < 0.0) == (f_hi < 0.0)) return std::nullopt;
  for (int it = 0; it < tol.max_bisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = domain.level(path(mid));
    if (std::abs(f_mid) <= tol.crossing) return mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) break;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  throw NoConvergence("boundary crossing bisection did not converge");
}

std::optional<double> ray_boundary_crossing(const LevelSetDomain& domain, const Vec3& a,
                                            const Vec3& b) {
  return path_boundary_crossing(domain, [&](double t) -> Vec3 { return a + t * (b - a); });
}

Vec3 project_to_boundary(const LevelSetDomain& domain, const Vec3& x) {
  Vec3 p = x;
  for (int it = 0; it < 50; ++it) {
    const double f = domain.level(p);
    if (std::abs(f) <= domain.tolerances().crossing) break;
    const Vec3 g = domain.gradient(p);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0)) throw DegenerateGradient("cannot project: vanishing gradient");
    p -= (f / g2) * g;
  }
  return p;
}

}  // namespace kbte
