#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "kbte/collision.hpp"
#include "kbte/phase_space.hpp"

namespace kbte {

/// Time-indexed named scalar channels.
class DiagnosticsSeries {
 public:
  explicit DiagnosticsSeries(std::vector<std::string> channel_names = {});

  /// Appends one row; values follow channel order. Times must increase strictly.
  void append(double t, const std::vector<double>& values);
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;
  std::size_t size() const { return times_.size(); }

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// Metadata as leading "# key=value" lines, then a header row and one row
  /// per time with 17 significant digits.
  std::string to_csv() const;
  static DiagnosticsSeries from_csv(const std::string& text);

 private:
  std::vector<double> times_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> channels_;
  std::map<std::string, std::string> metadata_;
};

/// Columns of the simulation CSV after t.
inline const std::vector<std::string>& simulation_channels() {
  static const std::vector<std::string> names{"mass",      "entropy",         "l2_norm",
                                              "winf_norm", "gamma_plus_norm", "rf_min_ratio"};
  return names;
}

/// Sum of F times the phase-space weights.
double total_mass(const DistributionField& field);

/// int (g log g - g + 1) mu_E with g = F / mu_E; nodes with g < 1e-300 contribute mu_E.
/// Throws NegativeDistribution for F below -tolerance * mu_E.
double relative_entropy(const DistributionField& field, double tolerance = 1e-12);

struct EntropyL1L2Report {
  /// (1/4) int |f|^2 1_{|f| <= mu_E^{1/2}}.
  double quadratic = 0.0;
  /// (1/4) int mu_E^{1/2} |f| 1_{|f| > mu_E^{1/2}}.
  double linear = 0.0;
  double lhs() const { return quadratic + linear; }
  double bound = 0.0;
  bool holds = false;
};
EntropyL1L2Report entropy_l1l2_check(const DistributionField& field, double E0,
                                     double tolerance = 1e-8);

struct FieldNorms {
  /// Discrete L2_{x,v} norm of f.
  double l2 = 0.0;
  /// max |w f|.
  double weighted_sup = 0.0;
  /// (n.v)-weighted L2 norm of the outgoing boundary trace of f.
  double boundary_gamma_plus = 0.0;
};
FieldNorms norms(const DistributionField& field);

/// Trace of f at every boundary station for every velocity, station-major.
std::vector<double> boundary_trace(const DistributionField& field);

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};
/// Least-squares slope of log(y) against t over t0 <= t <= t1, reported as
/// rate = -slope. Throws NonPositiveChannel if y <= 0 inside the window.
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y, double t0,
                        double t1);
DecayFit fit_decay_rate(const DiagnosticsSeries& series, const std::string& channel, double t0,
                        double t1);

/// R(f)(x,v) / (e^{-Phi(x)} nu(v)) at every node.
std::vector<double> rf_ratio(const DistributionField& field, const CollisionModel& model);
/// Minimum of rf_ratio over all nodes.
double rf_lower_bound_monitor(const DistributionField& field, const CollisionModel& model);
/// First output time after which the channel stays >= threshold (or +inf).
double fitted_warmup(const std::vector<double>& t, const std::vector<double>& ratio,
                     double threshold);

struct CoercivityReport {
  /// sup-norm of L applied to each of the five collision invariants.
  std::array<double, 5> kernel_residuals{};
  /// Smallest eigenvalues of L in increasing order (at least six).
  std::vector<double> eigenvalues;
  double spectral_gap = 0.0;
  /// C_L in <Lf,f> >= C_L ||(I-P_L) f||^2, equal to the sixth eigenvalue.
  double c_L = 0.0;
  double nu0 = 0.0;
};
CoercivityReport coercivity_report(const LinearOperatorMatrix& lin, const VelocityGrid& grid);

struct KernelDecayFit {
  /// Fitted exponent p in S(v) ~ C (1 + |v|)^p for the off-diagonal row sums
  /// S(v) = sum_u |k_w(v,u)| (1 + |u|)^{-alpha}, over nodes with
  /// tail_start R <= |v| <= tail_end R.
  double exponent = 0.0;
  /// max over nodes of S(v) (1 + |v|)^{1 + alpha}.
  double constant = 0.0;
  std::vector<double> speeds;
  std::vector<double> row_sums;
};
KernelDecayFit kernel_row_decay(const LinearOperatorMatrix& lin, const VelocityGrid& grid,
                                const WeightSpec& weight, double alpha = 1.0,
                                double tail_start = 0.5, double tail_end = 0.9);

}  // namespace kbte
