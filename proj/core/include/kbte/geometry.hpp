#pragma once

#include <functional>
#include <optional>
#include <string>

#include "kbte/types.hpp"

namespace kbte {

enum class DomainKind { Ball, Ellipsoid, Custom };

struct GeometryTolerances {
  /// |xi(x)| below this counts as "on the boundary" (length units).
  double band = 1e-9;
  /// |n.v| below this counts as grazing.
  double grazing = 1e-8;
  /// Bisection stops once |xi| drops below this.
  double crossing = 1e-12;
  int max_bisection = 200;
  /// Gradients smaller than this are treated as degenerate.
  double min_gradient = 1e-12;
};

/// A bounded domain {x : xi(x) < 0} described by a C^1 level-set function.
/// Immutable after construction; safe to share between threads.
class LevelSetDomain {
 public:
  using LevelFn = std::function<double(const Vec3&)>;
  using GradientFn = std::function<Vec3(const Vec3&)>;

  static LevelSetDomain ball(double radius = 1.0, const Vec3& center = Vec3::Zero(),
                             GeometryTolerances tol = {});
  static LevelSetDomain ellipsoid(const Vec3& semi_axes, const Vec3& center = Vec3::Zero(),
                                  GeometryTolerances tol = {});
  /// `bounding_radius` must enclose the domain around `center`.
  static LevelSetDomain custom(LevelFn level, GradientFn gradient, double bounding_radius,
                               const Vec3& center = Vec3::Zero(), GeometryTolerances tol = {});

  double level(const Vec3& x) const { return level_(x); }
  Vec3 gradient(const Vec3& x) const { return gradient_(x); }
  bool contains(const Vec3& x) const { return level_(x) < 0.0; }

  double bounding_radius() const { return bounding_radius_; }
  const Vec3& center() const { return center_; }
  DomainKind kind() const { return kind_; }
  const GeometryTolerances& tolerances() const { return tol_; }
  /// Shape parameters: radius for balls, semi-axes for ellipsoids.
  const Vec3& shape() const { return shape_; }

  /// Rough measure used to pick default integration steps: diameter / unit speed.
  double crossing_time() const { return 2.0 * bounding_radius_; }

 private:
  LevelSetDomain(DomainKind kind, LevelFn level, GradientFn gradient, double bounding_radius,
                 const Vec3& center, const Vec3& shape, GeometryTolerances tol);

  DomainKind kind_;
  LevelFn level_;
  GradientFn gradient_;
  double bounding_radius_;
  Vec3 center_;
  Vec3 shape_;
  GeometryTolerances tol_;
};

enum class BoundaryClass { Outgoing, Grazing, Incoming };

std::string to_string(BoundaryClass c);

/// grad xi / |grad xi|. Throws DegenerateGradient when |grad xi| is tiny.
Vec3 outward_normal(const LevelSetDomain& domain, const Vec3& x);

BoundaryClass classify_boundary(const LevelSetDomain& domain, const Vec3& x, const Vec3& v,
                                double tol);
inline BoundaryClass classify_boundary(const LevelSetDomain& domain, const Vec3& x,
                                       const Vec3& v) {
  return classify_boundary(domain, x, v, domain.tolerances().grazing);
}

/// Parameter tau in [0,1] where xi changes sign along the straight segment a->b,
/// or nullopt when there is no sign change. Throws NoConvergence when the
/// bisection cap is hit before |xi| <= crossing tolerance.
std::optional<double> ray_boundary_crossing(const LevelSetDomain& domain, const Vec3& a,
                                            const Vec3& b);

/// Same bisection on an arbitrary continuous path p(tau), tau in [0,1].
std::optional<double> path_boundary_crossing(const LevelSetDomain& domain,
                                             const std::function<Vec3(double)>& path);

/// Newton projection of a point near the boundary onto {xi = 0}.
Vec3 project_to_boundary(const LevelSetDomain& domain, const Vec3& x);

}  // namespace kbte
