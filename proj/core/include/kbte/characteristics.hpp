#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kbte/fields.hpp"
#include "kbte/geometry.hpp"
#include "kbte/rng.hpp"
#include "kbte/types.hpp"

namespace kbte {

struct PhasePoint {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

/// Called after every integrator substep with the current time and state.
using FlowObserver = std::function<void(double s, const PhasePoint& p)>;

/// One velocity-Verlet step of signed length delta (negative = backward).
PhasePoint verlet_step(const PotentialField& pot, const PhasePoint& p, double delta);

/// Integrates dX/ds = V, dV/ds = -grad Phi(X) from time t back to time s <= t.
/// When `domain` is given, leaving it throws LeftDomain.
PhasePoint flow(const PotentialField& pot, const PhasePoint& start, double t, double s,
                double step, const LevelSetDomain* domain = nullptr,
                const FlowObserver& observer = {});

/// Default integrator step for a domain: 1e-3 crossing times.
inline double default_step(const LevelSetDomain& domain) { return 1e-3 * domain.crossing_time(); }

struct BackwardTrace {
  /// Backward time actually travelled (== duration unless the boundary was hit).
  double elapsed = 0.0;
  bool hit_boundary = false;
  PhasePoint end;
};

/// Follows the characteristic through (x, v) backward for at most `duration`,
/// stopping at the first boundary hit.
BackwardTrace trace_backward(const LevelSetDomain& domain, const PotentialField& pot,
                             const PhasePoint& start, double duration, double step,
                             const FlowObserver& observer = {});

struct ExitPoint {
  double t_b = 0.0;
  Vec3 x_b = Vec3::Zero();
  Vec3 v_b = Vec3::Zero();
};

/// Backward exit time and position. Throws ExitNotFound past 1e4 crossing times.
ExitPoint backward_exit(const LevelSetDomain& domain, const PotentialField& pot,
                        const PhasePoint& start, double step);
inline ExitPoint backward_exit(const LevelSetDomain& domain, const PotentialField& pot,
                               const PhasePoint& start) {
  return backward_exit(domain, pot, start, default_step(domain));
}

/// Draws v from c_mu exp(-|v|^2/2) (n.v) on {n.v > 0}.
Vec3 sample_diffuse_velocity(RngStream& rng, const Vec3& n);

/// c_mu from a Gauss-Hermite x Gauss-Legendre evaluation of the outgoing flux of mu.
double diffuse_normalizer_quadrature(int order = 40);

enum class CycleTermination { ReachedInitialTime, Truncated };

struct CycleRecord {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct BackTimeCycle {
  std::vector<CycleRecord> records;
  CycleTermination termination = CycleTermination::Truncated;
};

BackTimeCycle build_back_cycle(const LevelSetDomain& domain, const PotentialField& pot,
                               RngStream& rng, double t, const Vec3& x, const Vec3& v,
                               int k_max, double step);
BackTimeCycle build_back_cycle(const LevelSetDomain& domain, const PotentialField& pot,
                               RngStream& rng, double t, const Vec3& x, const Vec3& v,
                               int k_max);

struct ReachEstimate {
  int k = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
};

/// Monte-Carlo estimates of P(t_k > 0) for each k, sharing the same sampled
/// cycles across k. Sample i uses RngStream(seed, i).
std::vector<ReachEstimate> cycle_reach_curve(const LevelSetDomain& domain,
                                             const PotentialField& pot, double t,
                                             const PhasePoint& start, const std::vector<int>& ks,
                                             int n_samples, std::uint64_t seed, int workers);

ReachEstimate cycle_reach_probability(const LevelSetDomain& domain, const PotentialField& pot,
                                      double t, const PhasePoint& start, int k, int n_samples,
                                      std::uint64_t seed, int workers = 1);

struct JacobianState {
  PhasePoint end;
  Mat3 dXdv = Mat3::Zero();
  Mat3 dVdv = Mat3::Identity();
  double det() const { return dXdv.determinant(); }
};

/// Flow together with the exact derivative of the discrete flow map w.r.t. v.
JacobianState jacobian_flow(const PotentialField& pot, const PhasePoint& start, double t,
                            double s, double step);

}  // namespace kbte
