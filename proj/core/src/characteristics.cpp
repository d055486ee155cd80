#include "kbte/characteristics.hpp"

#include <algorithm>
#include <cmath>

#include "kbte/errors.hpp"
#include "kbte/parallel.hpp"
#include "kbte/quadrature.hpp"

namespace kbte {

PhasePoint verlet_step(const PotentialField& pot, const PhasePoint& p, double delta) {
  PhasePoint out;
  const Vec3 v_half = p.v - 0.5 * delta * pot.grad(p.x);
  out.x = p.x + delta * v_half;
  out.v = v_half - 0.5 * delta * pot.grad(out.x);
  return out;
}

namespace {

int substep_count(double span, double step) {
  if (!(step > 0.0)) throw ValidationError("integrator step must be positive");
  return std::max(1, static_cast<int>(std::ceil(std::abs(span) / step - 1e-9)));
}

}  // namespace

PhasePoint flow(const PotentialField& pot, const PhasePoint& start, double t, double s,
                double step, const LevelSetDomain* domain, const FlowObserver& observer) {
  if (s == t) return start;
  const int n = substep_count(s - t, step);
  const double delta = (s - t) / n;
  PhasePoint p = start;
  for (int i = 0; i < n; ++i) {
    p = verlet_step(pot, p, delta);
    if (domain && domain->level(p.x) > 0.0) {
      throw LeftDomain("characteristic left the domain during flow");
    }
    if (observer) observer(t + (i + 1) * delta, p);
  }
  return p;
}

BackwardTrace trace_backward(const LevelSetDomain& domain, const PotentialField& pot,
                             const PhasePoint& start, double duration, double step,
                             const FlowObserver& observer) {
  const auto& tol = domain.tolerances();
  BackwardTrace out;
  out.end = start;
  PhasePoint p = start;

  const double level = domain.level(p.x);
  const double grad_norm = domain.gradient(p.x).norm();
  const bool near_boundary = grad_norm > 0.0 && std::abs(level) <= 10.0 * tol.band * grad_norm;
  if (near_boundary) {
    const Vec3 n = outward_normal(domain, p.x);
    const double nv = n.dot(p.v);
    if (nv < -tol.grazing) {
      // Incoming velocity: the backward path leaves at once.
      out.hit_boundary = true;
      out.elapsed = std::min(duration, tol.band / -nv);
      return out;
    }
    p.x -= tol.band * n;
  } else if (level > 0.0) {
    throw LeftDomain("backward trace started outside the domain");
  }

  double h = step;
  if (pot.is_zero()) {
    const double speed = p.v.norm();
    if (speed == 0.0) {
      out.elapsed = duration;
      out.end = p;
      return out;
    }
    h = std::max(step, 0.05 * domain.crossing_time() / speed);
  }

  double elapsed = 0.0;
  while (duration - elapsed > 1e-15 * std::max(1.0, duration)) {
    const double delta = -std::min(h, duration - elapsed);
    const PhasePoint q = verlet_step(pot, p, delta);
    if (domain.level(q.x) < 0.0) {
      p = q;
      elapsed -= delta;
      if (observer) observer(-elapsed, p);
      continue;
    }
    const Vec3 g = pot.grad(p.x);
    auto path = [&](double tau) -> Vec3 {
      const double d = tau * delta;
      return p.x + d * p.v - 0.5 * d * d * g;
    };
    const double tau = path_boundary_crossing(domain, path).value_or(1.0);
    p = verlet_step(pot, p, tau * delta);
    elapsed -= tau * delta;
    if (observer) observer(-elapsed, p);
    out.hit_boundary = true;
    break;
  }
  out.elapsed = out.hit_boundary ? elapsed : duration;
  out.end = p;
  return out;
}

ExitPoint backward_exit(const LevelSetDomain& domain, const PotentialField& pot,
                        const PhasePoint& start, double step) {
  const double horizon = 1e4 * domain.crossing_time();
  const BackwardTrace trace = trace_backward(domain, pot, start, horizon, step);
  if (!trace.hit_boundary) {
    throw ExitNotFound("backward characteristic did not reach the boundary within the horizon");
  }
  return {trace.elapsed, trace.end.x, trace.end.v};
}

Vec3 sample_diffuse_velocity(RngStream& rng, const Vec3& n) {
  const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = (a - a.dot(n) * n).normalized();
  const Vec3 t2 = n.cross(t1);
  const double g1 = rng.normal();
  const double g2 = rng.normal();
  const double u = std::sqrt(-2.0 * std::log(rng.uniform_open()));
  return g1 * t1 + g2 * t2 + u * n;
}

double diffuse_normalizer_quadrature(int order) {
  const QuadratureRule tangential = gauss_hermite_probabilist(order);
  const QuadratureRule normal = gauss_legendre(order, 0.0, 12.0);
  double flux = 0.0;
  for (double wa : tangential.weights) {
    for (double wb : tangential.weights) {
      for (std::size_t k = 0; k < normal.nodes.size(); ++k) {
        const double u = normal.nodes[k];
        flux += wa * wb * normal.weights[k] * u * std::exp(-0.5 * u * u);
      }
    }
  }
  return 1.0 / flux;
}

BackTimeCycle build_back_cycle(const LevelSetDomain& domain, const PotentialField& pot,
                               RngStream& rng, double t, const Vec3& x, const Vec3& v,
                               int k_max, double step) {
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  BackTimeCycle cycle;
  PhasePoint current{x, v};
  double tk = t;
  for (int k = 1; k <= k_max; ++k) {
    const ExitPoint exit = backward_exit(domain, pot, current, step);
    tk -= exit.t_b;
    const Vec3 n = outward_normal(domain, exit.x_b);
    const Vec3 vk = sample_diffuse_velocity(rng, n);
    cycle.records.push_back({tk, exit.x_b, vk});
    if (tk <= 0.0) {
      cycle.termination = CycleTermination::ReachedInitialTime;
      return cycle;
    }
    current = {exit.x_b, vk};
  }
  cycle.termination = CycleTermination::Truncated;
  return cycle;
}

BackTimeCycle build_back_cycle(const LevelSetDomain& domain, const PotentialField& pot,
                               RngStream& rng, double t, const Vec3& x, const Vec3& v,
                               int k_max) {
  return build_back_cycle(domain, pot, rng, t, x, v, k_max, default_step(domain));
}

std::vector<ReachEstimate> cycle_reach_curve(const LevelSetDomain& domain,
                                             const PotentialField& pot, double t,
                                             const PhasePoint& start, const std::vector<int>& ks,
                                             int n_samples, std::uint64_t seed, int workers) {
  if (n_samples < 1) throw ValidationError("n_samples must be positive");
  int k_max = 1;
  for (int k : ks) {
    if (k < 1) throw ValidationError("cycle index k must be at least 1");
    k_max = std::max(k_max, k);
  }
  // Number of leading records with t_k > 0, per sample.
  std::vector<int> surviving(n_samples, 0);
  const double step = default_step(domain);
  parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      RngStream rng(seed, i);
      const BackTimeCycle cycle =
          build_back_cycle(domain, pot, rng, t, start.x, start.v, k_max, step);
      int count = 0;
      for (const auto& r : cycle.records) {
        if (r.t > 0.0) ++count;
      }
      surviving[i] = count;
    }
  });
  std::vector<ReachEstimate> out;
  for (int k : ks) {
    long hits = 0;
    for (int m : surviving) hits += (m >= k) ? 1 : 0;
    const double p = static_cast<double>(hits) / n_samples;
    out.push_back({k, p, std::sqrt(p * (1.0 - p) / n_samples), n_samples});
  }
  return out;
}

ReachEstimate cycle_reach_probability(const LevelSetDomain& domain, const PotentialField& pot,
                                      double t, const PhasePoint& start, int k, int n_samples,
                                      std::uint64_t seed, int workers) {
  return cycle_reach_curve(domain, pot, t, start, {k}, n_samples, seed, workers).front();
}

JacobianState jacobian_flow(const PotentialField& pot, const PhasePoint& start, double t,
                            double s, double step) {
  JacobianState state;
  state.end = start;
  if (s == t) return state;
  const int n = substep_count(s - t, step);
  const double delta = (s - t) / n;
  Vec3 x = start.x;
  Vec3 v = start.v;
  Mat3 jx = Mat3::Zero();
  Mat3 jv = Mat3::Identity();
  for (int i = 0; i < n; ++i) {
    const Vec3 v_half = v - 0.5 * delta * pot.grad(x);
    const Mat3 jv_half = jv - 0.5 * delta * pot.hessian(x) * jx;
    x += delta * v_half;
    jx += delta * jv_half;
    v = v_half - 0.5 * delta * pot.grad(x);
    jv = jv_half - 0.5 * delta * pot.hessian(x) * jx;
  }
  state.end = {x, v};
  state.dXdv = jx;
  state.dVdv = jv;
  return state;
}

}  // namespace kbte
