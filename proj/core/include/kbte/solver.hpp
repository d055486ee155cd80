#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "kbte/collision.hpp"
#include "kbte/diagnostics.hpp"
#include "kbte/phase_space.hpp"

namespace kbte {

enum class DampingMode {
  None,
  /// lambda = e^{-Phi} nu.
  Nu,
  /// lambda = R(f) for a frozen f.
  Rf,
};

enum class SchemeKind {
  /// Nonlinear positivity-preserving steps on F.
  Positivity,
  /// Damped transport semigroup on the perturbation.
  Linear,
};

struct SchemeConfig {
  double dt = 0.01;
  double t_end = 1.0;
  /// 1 (trilinear) or 3 (tricubic, linear scheme only).
  int interpolation_order = 1;
  DampingMode damping = DampingMode::Nu;
  SchemeKind kind = SchemeKind::Positivity;
  int picard_max_iterations = 30;
  /// Stop once successive iterates differ by less than this in sup |w f|.
  double picard_tolerance = 1e-9;
  /// Horizon of the Picard iteration.
  double picard_t_end = 0.05;
  /// Restore the local collision invariants after each nonlinear step.
  bool symmetrized = true;
  /// Restore the total mass after each nonlinear step.
  bool conserve_mass = true;
  std::uint64_t seed = 0;
  double output_every = 0.1;
  /// Characteristic integrator step; 0 selects the domain default.
  double integrator_step = 0.0;
  int workers = 1;

  void validate() const;
};

/// dt max|v| / dx, advisory only.
double cfl_number(const SchemeConfig& config, const PhaseSpace& space);

/// One semi-Lagrangian step of length dt as a sparse matrix acting on the
/// ratio perturbation q. Each target node (x_i, v_a) reads the foot of its
/// backward characteristic; a foot on the wall reads the diffuse closure at
/// the nearest boundary station, which is the (mu (n.v))-weighted average of
/// the outgoing ratio there.
class TransportPlan {
 public:
  TransportPlan(const PhaseSpace& space, const CollisionModel& model, double dt, int order,
                double step, int workers = 1);

  /// out = T q, multiplied node-wise by damping when given.
  void apply(const std::vector<double>& q, std::vector<double>& out,
             const std::vector<double>* damping = nullptr, int workers = 1) const;
  /// Diffuse-closure ratio at every station.
  std::vector<double> station_values(const std::vector<double>& q) const;

  double dt() const { return dt_; }
  /// Backward time travelled before the wall (dt when it is not reached).
  const std::vector<double>& elapsed() const { return elapsed_; }
  /// int e^{-Phi} nu along the backward path over the whole step.
  const std::vector<double>& nu_exposure() const { return exposure_; }
  std::size_t entries() const { return cols_.size(); }

 private:
  std::size_t size_ = 0;
  double dt_ = 0.0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
  std::vector<std::size_t> st_ptr_;
  std::vector<std::uint32_t> st_cols_;
  std::vector<double> st_vals_;
  std::vector<double> elapsed_;
  std::vector<double> exposure_;
};

struct PicardResult {
  std::vector<double> times;
  /// Last iterate at every time, as h = w f.
  std::vector<DistributionField> trajectory;
  /// sup |h^{m+1} - h^m| over all times, m = 0, 1, ...
  std::vector<double> residuals;
  /// residuals[m] / residuals[m-1].
  std::vector<double> ratios;
  bool converged = false;
  bool contractive = true;
};

struct SimulationResult {
  DiagnosticsSeries series;
  DistributionField final_state;
  /// Relative entropy after every step (positivity scheme only).
  std::vector<double> step_entropy;
  /// Total mass after every step.
  std::vector<double> step_mass;
};

using SnapshotHook = std::function<void(int step, double t, const DistributionField& field)>;

class KineticSolver {
 public:
  KineticSolver(std::shared_ptr<const PhaseSpace> space, std::shared_ptr<const CollisionModel> model,
                SchemeConfig config);

  const PhaseSpace& space() const { return *space_; }
  const std::shared_ptr<const PhaseSpace>& space_ptr() const { return space_; }
  const CollisionModel& model() const { return *model_; }
  const SchemeConfig& config() const { return config_; }
  const TransportPlan& plan() const;
  const LinearOperatorMatrix& linearized() const;

  /// One undamped transport step of length dt.
  DistributionField transport_step(const DistributionField& field) const;
  /// h(t) of the damped transport semigroup; t must be a multiple of dt.
  /// mode Rf needs the frozen field.
  DistributionField damped_semigroup(const DistributionField& h0, DampingMode mode, double t,
                                     const DistributionField* frozen = nullptr) const;
  /// F_new = (F_tr + dt Q+(F,F)) / (1 + dt nu(F)) node-wise.
  DistributionField positivity_step(const DistributionField& F) const;
  /// Ratio-form right-hand side e^{-Phi}[K q + Gamma(q, q)] of the mild iteration.
  std::vector<double> mild_source(const std::vector<double>& q, bool linear = true,
                                  bool nonlinear = true) const;
  /// Stops early once a successive-residual ratio reaches 1. Throws
  /// NonContractive on failure when throw_on_failure is set; max_iterations
  /// overrides the configured limit when positive.
  PicardResult picard_mild_iteration(const DistributionField& h0, bool throw_on_failure = true,
                                     int max_iterations = 0) const;
  SimulationResult run_simulation(const DistributionField& F0,
                                  const SnapshotHook& snapshot = {}) const;

 private:
  std::vector<double> step_ratio(const std::vector<double>& q) const;
  std::vector<double> damping_factors(DampingMode mode, const std::vector<double>* rf) const;
  void restore_total_mass(const std::vector<double>& before, std::vector<double>& q) const;
  void tilt_columns(const std::vector<double>& reference, std::vector<double>& q) const;

  std::shared_ptr<const PhaseSpace> space_;
  std::shared_ptr<const CollisionModel> model_;
  SchemeConfig config_;
  mutable std::unique_ptr<TransportPlan> plan_;
  mutable std::unique_ptr<LinearOperatorMatrix> lin_;
  mutable Eigen::MatrixXd k_ratio_;
};

struct ContractionSweep {
  std::vector<double> amplitudes;
  /// Largest successive-residual ratio seen at each amplitude.
  std::vector<double> max_ratios;
  std::vector<bool> contractive;
  /// Largest contractive and smallest non-contractive amplitude (+inf if none failed).
  double last_contractive = 0.0;
  double threshold = 0.0;
};

/// Runs the Picard iteration from random_perturbation(space, a, seed) for
/// a = start, start * factor, ... until the iteration stops contracting within
/// `iterations` iterates or max_amplitude is passed.
ContractionSweep contraction_sweep(const KineticSolver& solver, std::uint64_t seed, double start,
                                   double factor, double max_amplitude, int iterations);

DistributionField transport_step(const KineticSolver& solver, const DistributionField& field);
DistributionField damped_semigroup(const KineticSolver& solver, const DistributionField& h0,
                                   DampingMode mode, double t,
                                   const DistributionField* frozen = nullptr);
DistributionField positivity_step(const KineticSolver& solver, const DistributionField& F);
PicardResult picard_mild_iteration(const KineticSolver& solver, const DistributionField& h0);
SimulationResult run_simulation(const KineticSolver& solver, const DistributionField& F0,
                                const SnapshotHook& snapshot = {});

}  // namespace kbte
