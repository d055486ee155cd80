#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "kbte/fields.hpp"
#include "kbte/velocity_grid.hpp"

namespace kbte {

/// B(v-u, w) = |v-u|^gamma b(cos theta), 0 <= b(c) <= C_b |c|.
struct KernelSpec {
  double gamma = 1.0;
  /// b(c) = angular_scale * |c| unless `angular` is set.
  double angular_scale = 1.0 / (4.0 * 3.14159265358979323846);
  std::function<double(double)> angular;
  /// C_b for custom angular parts.
  double angular_bound = 0.0;
  /// Gauss-Legendre nodes in cos(theta) on (0,1] and trapezoid nodes in azimuth.
  int polar_order = 2;
  int azimuth_order = 6;

  static KernelSpec hard_sphere() { return {}; }

  double b(double c) const { return angular ? angular(c) : angular_scale * std::abs(c); }
  double bound() const { return angular ? angular_bound : angular_scale; }
  /// Throws ValidationError for gamma outside [0,1], bad orders, or b violating its bound.
  void validate() const;
};

/// Hemispherical direction rule relative to the unit relative velocity. Since
/// w and -w give the same post-collision pair, the weights carry b(c) + b(-c).
struct DirectionRule {
  std::vector<double> cos_theta;
  std::vector<double> sin_theta;
  std::vector<double> cos_phi;
  std::vector<double> sin_phi;
  std::vector<double> weight;
  /// Sum of weights: the discrete value of int_{S^2} b(cos theta) dw.
  double total = 0.0;
  std::size_t size() const { return weight.size(); }
};

DirectionRule make_direction_rule(const KernelSpec& kernel);

/// Orthonormal pair completing the unit vector e to a right-handed frame.
void complete_frame(const Vec3& e, Vec3& e1, Vec3& e2);

/// How the ratio F/mu is continued past the velocity grid.
enum class Extension {
  /// Ratio tends to 1 (equilibrium tail), for full distributions.
  Maxwellian,
  /// Ratio tends to 0, for perturbations.
  Zero,
};

/// Grid + kernel with the precomputed pieces every collision evaluation shares.
class CollisionModel {
 public:
  CollisionModel(VelocityGrid grid, KernelSpec kernel);

  const VelocityGrid& grid() const { return grid_; }
  const KernelSpec& kernel() const { return kernel_; }
  const DirectionRule& directions() const { return dirs_; }

  /// nu(v_a) on the grid nodes.
  const std::vector<double>& nu() const { return nu_; }
  double nu0() const { return nu0_; }
  /// nu at an arbitrary velocity by the same grid x sphere quadrature.
  double collision_frequency(const Vec3& v) const;
  /// Linear interpolation in |v| of a fine radial table of nu.
  double nu_radial(double speed) const;

  /// Matrix A with (A F)(v_a) = int int B F(u) dw du, i.e. nu(F).
  const Eigen::MatrixXd& loss_matrix() const;

  /// Batched gain term over nx independent columns (e.g. spatial nodes).
  /// Inputs are ratio perturbations in v-major layout q[a * nx + x]; the ratio
  /// is offset + q, with q taken as 0 beyond the grid. Output:
  ///   out[a*nx+x] = mu_a sum_j W mu_j sum_d w_d |v_a-v_j|^gamma
  ///                 (o1 + I q1(u')) (o2 + I q2(v')).
  void gain_batch(const double* q1, double o1, const double* q2, double o2, std::size_t nx,
                  double* out, int workers) const;
  void gain_batch(const double* q1, double o1, const double* q2, double o2, std::size_t nx,
                  double* out) const;
  /// Same with a separate offset per column.
  void gain_batch(const double* q1, const double* o1, const double* q2, const double* o2,
                  std::size_t nx, double* out, int workers) const;

 private:
  void gain_row(std::size_t a, const double* q1, const double* o1, const double* q2,
                const double* o2, std::size_t nx, double* out,
                std::vector<double>& scratch) const;

  VelocityGrid grid_;
  KernelSpec kernel_;
  DirectionRule dirs_;
  std::vector<double> nu_;
  double nu0_ = 0.0;
  std::vector<double> nu_table_;
  double nu_table_step_ = 0.0;
  mutable Eigen::MatrixXd loss_matrix_;
};

double collision_frequency(const CollisionModel& model, const Vec3& v);

/// Pointwise Q+(F1,F2)(v_a) and Q-(F1,F2)(v_a) for full node values.
double q_gain(const CollisionModel& model, const std::vector<double>& F1,
              const std::vector<double>& F2, std::size_t a, Extension ext = Extension::Maxwellian);
double q_loss(const CollisionModel& model, const std::vector<double>& F1,
              const std::vector<double>& F2, std::size_t a);
std::vector<double> q_gain_all(const CollisionModel& model, const std::vector<double>& F1,
                               const std::vector<double>& F2,
                               Extension ext = Extension::Maxwellian);
std::vector<double> q_loss_all(const CollisionModel& model, const std::vector<double>& F1,
                               const std::vector<double>& F2);

/// Result of projecting one post-collision pair onto six grid nodes so that
/// mass, momentum and energy are conserved exactly.
struct CollisionStencil {
  int i = 0, j = 0;
  int lam = 0, mu = 0, lam_s = 0, mu_s = 0;
  double r = 0.0;
  /// Coefficients of the six nodes: -1, -1, 1-r, 1-r, r, r.
  std::array<int, 6> nodes() const { return {i, j, lam, mu, lam_s, mu_s}; }
  std::array<double, 6> coeffs() const { return {-1.0, -1.0, 1.0 - r, 1.0 - r, r, r}; }
};

/// Returns false when no admissible projection exists (collision dropped).
bool project_collision(const VelocityGrid& grid, int i, int j, const Vec3& v_post,
                       CollisionStencil& out);

/// Visits every admissible (i < j, direction) collision with its weight
/// c = W^2 |v_i - v_j|^gamma w_d and stencil. Work is split over i.
void for_each_projected_collision(
    const CollisionModel& model, int workers,
    const std::function<void(int chunk, double c, const CollisionStencil&)>& visit,
    int chunks);

/// Conservative symmetrized collision operator on full node values.
std::vector<double> q_symmetrized(const CollisionModel& model, const std::vector<double>& F,
                                  int workers = 1);

struct LinearOperatorMatrix {
  std::vector<double> nu;
  double nu0 = 0.0;
  /// K acting on node values (quadrature weights folded in); L = diag(nu) - K.
  Eigen::MatrixXd K;

  Eigen::MatrixXd L() const;
  std::vector<double> apply_L(const std::vector<double>& f) const;
  std::vector<double> apply_K(const std::vector<double>& f) const;
};

/// L from the linearization of the conservative operator; K = diag(nu) - L.
LinearOperatorMatrix assemble_linearized(const CollisionModel& model, int workers = 1);

/// K_w h = w K(h / w) at position x.
std::vector<double> apply_Kw(const LinearOperatorMatrix& lin, const VelocityGrid& grid,
                             const WeightSpec& weight, const PotentialField& pot, const Vec3& x,
                             const std::vector<double>& h);

struct GammaParts {
  std::vector<double> plus;
  std::vector<double> minus;
  std::vector<double> total() const;
};

/// Gamma(f1,f2) = mu^{-1/2} Q(sqrt(mu) f1, sqrt(mu) f2), split into gain and loss.
GammaParts gamma_nonlinear(const CollisionModel& model, const std::vector<double>& f1,
                           const std::vector<double>& f2);

/// R(f)(x, v) = int int B [mu_E + mu_E^{1/2} f](x,u) at every node.
std::vector<double> r_of_f(const CollisionModel& model, const PotentialField& pot, const Vec3& x,
                           const std::vector<double>& f);
double r_of_f(const CollisionModel& model, const PotentialField& pot, const Vec3& x,
              const std::vector<double>& f, std::size_t a);

struct MomentTriple {
  double a = 0.0;
  Vec3 b = Vec3::Zero();
  double c = 0.0;
};

enum class ProjectionBasis {
  /// Grid-orthonormalized sqrt(mu_bar) {1, v, (|v|^2-3)/sqrt6}, mu_bar normalized.
  Orthonormal,
  /// The unnormalized coefficients a = int f sqrt(mu), ... applied verbatim.
  Literal,
};

struct ProjectionResult {
  MomentTriple moments;
  std::vector<double> projected;
};

ProjectionResult project_PL(const VelocityGrid& grid, const std::vector<double>& f,
                            ProjectionBasis basis = ProjectionBasis::Orthonormal);

/// The five orthonormal basis vectors used by project_PL.
std::array<std::vector<double>, 5> kernel_basis(const VelocityGrid& grid);

enum class FluxNormalizer {
  /// 1 / (discrete outgoing flux of mu): P_gamma is an exact projection on the grid.
  Discrete,
  /// 1 / (2 pi).
  Analytic,
};

/// P_gamma f = c_mu sqrt(mu) sum_{n.v'>0} W f sqrt(mu)(v') (n.v'), at every node.
std::vector<double> project_Pgamma(const VelocityGrid& grid, const std::vector<double>& f,
                                   const Vec3& n,
                                   FluxNormalizer normalizer = FluxNormalizer::Discrete);

/// <f, g>_{gamma+} = sum_{n.v>0} W f g (n.v).
double gamma_plus_inner(const VelocityGrid& grid, const std::vector<double>& f,
                        const std::vector<double>& g, const Vec3& n);

}  // namespace kbte
